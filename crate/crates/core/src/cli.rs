//! Command runner behind the `halfline` binary: each command reads a
//! [`RunConfig`], writes CSV tables and a JSON report into the output
//! directory and maps the outcome to an exit code.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::config::{EvolutionMethodChoice, RunConfig};
use crate::evolution::{evolve_factorized, evolve_spectral, representer_of, CrankNicolson, EvolutionResult};
use crate::experiments::{
    asymmetry_study, hardy_density_study, roundtrip_study, write_potential, ExperimentReport, StudyGrids, Tolerance,
    ROUNDTRIP_PANEL_WIDTH,
};
use crate::hardy::{atom, hardy_projection, positive_part, Domain, Side};
use crate::jost::{JostSolver, ResonanceFinder, SearchBox};
use crate::potential::Potential;
use crate::radial_ode::RegularSolver;
use crate::spectral::{RadialFunction, SpectralFunction, SpectralTransform};
use crate::verify;

type C = Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

/// Environment variable naming the output directory; `--out` wins over it.
pub const OUTPUT_ENV: &str = "HS_OUTPUT_DIR";

/// Half-width of the energy window written for Hardy atoms.
const ATOM_WINDOW: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Jost,
    Resonances,
    Transform,
    Evolve,
    Hardy,
    Density,
    Roundtrip,
    Asymmetry,
    Verify,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Jost,
        Command::Resonances,
        Command::Transform,
        Command::Evolve,
        Command::Hardy,
        Command::Density,
        Command::Roundtrip,
        Command::Asymmetry,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Jost => "jost",
            Command::Resonances => "resonances",
            Command::Transform => "transform",
            Command::Evolve => "evolve",
            Command::Hardy => "hardy",
            Command::Density => "density",
            Command::Roundtrip => "roundtrip",
            Command::Asymmetry => "asymmetry",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn usage() -> String {
    let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
    format!("usage: halfline <config> <command> [options]\ncommands: {}", names.join(", "))
}

/// Where a command should write, and what produced the failure if it failed.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Relative table paths in the config resolve against this.
    pub base_dir: PathBuf,
}

impl RunContext {
    /// `--out`, else `$HS_OUTPUT_DIR`, else the config's `output.dir`.
    pub fn resolve(config: &RunConfig, out_flag: Option<PathBuf>, base_dir: PathBuf) -> Self {
        let out_dir = out_flag
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| config.output_dir.clone());
        Self { out_dir, base_dir }
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Bad input discovered after parsing (unreadable table, bad potential).
    Config(String),
    /// A numerical guard fired; the name comes first.
    Guard { guard: Option<&'static str>, message: String },
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => EXIT_CONFIG,
            RunError::Guard { .. } => EXIT_GUARD,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Guard { guard: Some(g), message } => write!(f, "{g}: {message}"),
            RunError::Guard { guard: None, message } => write!(f, "numerical failure: {message}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.into())
    }
}

macro_rules! guarded {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Guard { guard: e.guard(), message: e.to_string() }
            }
        }
    )*};
}

guarded!(
    crate::jost::JostError,
    crate::spectral::SpectralError,
    crate::hardy::HardyError,
    crate::evolution::EvolutionError,
    crate::experiments::ExperimentError
);

/// Extra knobs from the command line that override the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub evolution_method: Option<EvolutionMethodChoice>,
    pub times: Option<Vec<f64>>,
    pub atoms: Option<(Side, usize)>,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<ExperimentReport>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Numeric CSV with `\n` line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), RunError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_number(x)))?;
    }
    w.flush()?;
    Ok(())
}

fn complex_rows<'a>(coords: &'a [f64], values: &'a [C]) -> impl Iterator<Item = Vec<f64>> + 'a {
    coords.iter().zip(values).map(|(&x, z)| vec![x, z.re, z.im])
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
    reports: Vec<ExperimentReport>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir, files: Vec::new(), reports: Vec::new() })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_csv(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }

    fn report(&mut self, report: ExperimentReport) -> Result<(), RunError> {
        let path = self.dir.join(format!("{}.json", report.name));
        fs::write(&path, report.to_json())?;
        self.files.push(path);
        for note in &report.notes {
            log::warn!("{}: {note}", report.name);
        }
        self.reports.push(report);
        Ok(())
    }

    fn finish(self) -> RunSummary {
        RunSummary { reports: self.reports, files: self.files }
    }
}

fn base_parameters(v: &Potential, grids: &StudyGrids) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    write_potential(v, &mut p);
    grids.write(&mut p);
    p
}

/// Runs `command` and returns what it wrote. Failed tolerances are not an
/// error here; [`exit_code`] turns them into exit status 1.
pub fn run(
    command: Command,
    config: &RunConfig,
    overrides: &Overrides,
    ctx: &RunContext,
) -> Result<RunSummary, RunError> {
    let v = config.potential.build(&ctx.base_dir).map_err(|e| RunError::Config(e.to_string()))?;
    let mut out = Output::new(&ctx.out_dir)?;
    log::info!("{command}: potential {:?}, output {}", v.kind(), ctx.out_dir.display());
    match command {
        Command::Jost => jost(config, &v, &mut out)?,
        Command::Resonances => resonances(config, &v, &mut out)?,
        Command::Transform => transform(config, &v, &mut out)?,
        Command::Evolve => evolve(config, overrides, &v, &mut out)?,
        Command::Hardy => hardy(config, overrides, &v, &mut out)?,
        Command::Density => {
            let r = hardy_density_study(&v, config.density_atom_count, &config.density_targets, &config.grids)?;
            let counts: Vec<usize> = crate::experiments::doubling_counts(config.density_atom_count);
            let labels: Vec<String> = config.density_targets.iter().map(|t| t.label()).collect();
            let mut header = vec!["N".to_string()];
            header.extend(labels.iter().cloned());
            let rows: Vec<Vec<f64>> = counts
                .iter()
                .map(|&m| {
                    let mut row = vec![m as f64];
                    row.extend(labels.iter().map(|l| r.metrics.get(&format!("{l}.err_N{m}")).copied().unwrap_or(f64::NAN)));
                    row
                })
                .collect();
            out.csv("density.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)?;
            out.report(r)?;
        }
        Command::Roundtrip => {
            let grids = roundtrip_grids(&config.grids, config.roundtrip_r_max);
            let r = roundtrip_study(&v, &config.roundtrip_atoms, &grids)?;
            let rows = config.roundtrip_atoms.iter().map(|&n| {
                vec![n as f64, r.metrics[&format!("atom{n}.err")], r.metrics[&format!("atom{n}.inverse_norm")]]
            });
            out.csv("roundtrip.csv", &["atom", "err", "inverse_norm"], rows.collect::<Vec<_>>())?;
            out.report(r)?;
        }
        Command::Asymmetry => {
            let times = overrides.times.clone().unwrap_or_else(|| config.asymmetry_times.clone());
            let r = asymmetry_study(&v, &config.asymmetry_atoms, &times, &config.grids)?;
            let mut rows = Vec::new();
            for &n in &config.asymmetry_atoms {
                for &t in &times {
                    rows.push(vec![n as f64, t, r.metrics[&format!("atom{n}.leakage_t{t:?}")]]);
                }
            }
            out.csv("asymmetry.csv", &["atom", "t", "leakage"], rows)?;
            out.report(r)?;
        }
        Command::Verify => {
            let outcomes = verify::run_all(&config.grids);
            let mut rows = Vec::new();
            for o in outcomes {
                println!("{}", o.line());
                rows.push(vec![o.id as f64, if o.passed() { 1.0 } else { 0.0 }, o.report.runtime]);
                let mut report = o.report.clone();
                report.name = format!("criterion_{:02}", o.id);
                if let Some(e) = &o.error {
                    report.passed = false;
                    report.notes.push(format!("error: {e}"));
                }
                out.report(report)?;
            }
            out.csv("verify.csv", &["criterion", "passed", "runtime_s"], rows)?;
        }
    }
    Ok(out.finish())
}

/// Exit status for a finished run: 0 when every tolerance held, else 1.
pub fn exit_code(result: &Result<RunSummary, RunError>) -> i32 {
    match result {
        Ok(s) if s.passed() => EXIT_OK,
        Ok(_) => EXIT_CHECKS_FAILED,
        Err(e) => e.exit_code(),
    }
}

/// The configured grids widened to `r_max`, with panels narrow enough for
/// `sin kr` at `k_max r_max`.
pub fn roundtrip_grids(grids: &StudyGrids, r_max: f64) -> StudyGrids {
    let panels = (grids.k_max * r_max / ROUNDTRIP_PANEL_WIDTH).ceil() as usize;
    StudyGrids { r_max, k_panels: panels.max(grids.k_panels), r_panels: panels.max(grids.r_panels), ..grids.clone() }
}

fn jost_energies(config: &RunConfig) -> Vec<f64> {
    let (a, b, n) = (config.jost_e_min, config.jost_e_max, config.jost_points);
    if n == 1 {
        return vec![a];
    }
    let s = |i: usize| i as f64 / (n - 1) as f64;
    // log spacing needs a positive start; from zero it falls back to linear
    if config.jost_log_spacing && a > 0.0 {
        (0..n).map(|i| a * (b / a).powf(s(i))).collect()
    } else {
        (0..n).map(|i| a + (b - a) * s(i)).collect()
    }
}

fn jost(config: &RunConfig, v: &Potential, out: &mut Output) -> Result<(), RunError> {
    let start = Instant::now();
    let solver = JostSolver::new(RegularSolver::new(config.ode_tol));
    let mut rows = Vec::new();
    let mut unitarity: f64 = 0.0;
    for e in jost_energies(config) {
        let pair = solver.jost_functions(v, C::new(e, 0.0))?;
        let w = solver.wave_matrices(v, e)?;
        let s = solver.s_matrix(v, e)?;
        unitarity = unitarity.max((s.norm() - 1.0).abs());
        rows.push(vec![
            e,
            pair.a_minus.re,
            pair.a_minus.im,
            pair.a_plus.re,
            pair.a_plus.im,
            w.w_plus.re,
            w.w_plus.im,
            s.re,
            s.im,
        ]);
    }
    let n = rows.len();
    out.csv("jost.csv", &["E", "Re A−", "Im A−", "Re A+", "Im A+", "Re W+", "Im W+", "Re S", "Im S"], rows)?;
    let mut p = base_parameters(v, &config.grids);
    p.insert("jost.e_min".into(), format!("{:?}", config.jost_e_min));
    p.insert("jost.e_max".into(), format!("{:?}", config.jost_e_max));
    let metrics = BTreeMap::from([("points".to_string(), n as f64), ("max_unitarity_defect".to_string(), unitarity)]);
    out.report(ExperimentReport::finish("jost", p, metrics, Vec::new(), Vec::new(), start))
}

fn resonances(config: &RunConfig, v: &Potential, out: &mut Output) -> Result<(), RunError> {
    let start = Instant::now();
    let search_box = SearchBox::new(config.resonance_re, config.resonance_im)?;
    let finder = ResonanceFinder {
        jost: JostSolver::new(RegularSolver::new(config.ode_tol)),
        contour_guard: config.contour_guard,
        residual_tol: config.newton_residual,
        ..ResonanceFinder::default()
    };
    let found = finder.find(v, &search_box, config.resonance_max_count)?;
    let rows = found.resonances.iter().map(|r| vec![r.k.re, r.k.im, r.e.re, r.e.im, r.residual]);
    out.csv("resonances.csv", &["Re k", "Im k", "Re E", "Im E", "residual"], rows.collect::<Vec<_>>())?;
    let mut p = base_parameters(v, &config.grids);
    p.insert("box".into(), format!("{:?}", (config.resonance_re, config.resonance_im)));
    let metrics = BTreeMap::from([
        ("count".to_string(), found.resonances.len() as f64),
        ("winding".to_string(), found.winding as f64),
        ("max_residual".to_string(), found.resonances.iter().map(|r| r.residual).fold(0.0, f64::max)),
    ]);
    let tolerances = vec![Tolerance::max("max_residual", config.newton_residual)];
    out.report(ExperimentReport::finish("resonances", p, metrics, tolerances, Vec::new(), start))
}

fn solver_transform(config: &RunConfig, v: &Potential) -> Result<SpectralTransform, RunError> {
    Ok(SpectralTransform::with_solver(
        v,
        config.grids.radial(v),
        config.grids.energy(),
        RegularSolver::new(config.ode_tol),
    )?)
}

fn transform(config: &RunConfig, v: &Potential, out: &mut Output) -> Result<(), RunError> {
    let start = Instant::now();
    let tr = solver_transform(config, v)?;
    let (c, w) = (config.transform_center, config.transform_width);
    let f = RadialFunction::from_fn(tr.radial_grid().clone(), |r| C::new((-(r - c).powi(2) / (2.0 * w * w)).exp(), 0.0));
    let g = tr.psi_forward(&f)?;
    let back = tr.psi_inverse(&g)?;
    out.csv("transform_forward.csv", &["E", "Re value", "Im value"], complex_rows(tr.energy_grid().energies(), &g.values))?;
    out.csv("transform_inverse.csv", &["r", "Re value", "Im value"], complex_rows(tr.radial_grid().nodes(), &back.values))?;
    let p = base_parameters(v, &config.grids);
    let metrics = BTreeMap::from([
        ("parseval".to_string(), (g.norm() - f.norm()).abs() / f.norm()),
        ("roundtrip".to_string(), back.distance(&f) / f.norm()),
    ]);
    let tolerances = vec![Tolerance::max("parseval", 1e-4), Tolerance::max("roundtrip", 1e-4)];
    out.report(ExperimentReport::finish("transform", p, metrics, tolerances, Vec::new(), start))
}

/// Crank–Nicolson snapshots for arbitrary time lists: one sweep per sign.
fn cn_snapshots(
    cn: &CrankNicolson,
    v: &Potential,
    f: &RadialFunction,
    times: &[f64],
) -> Result<Vec<EvolutionResult>, RunError> {
    let mut out = Vec::new();
    for positive in [true, false] {
        let mut ts: Vec<f64> = times.iter().copied().filter(|&t| (t >= 0.0) == positive).collect();
        ts.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        if !ts.is_empty() {
            out.extend(cn.advance_to(v, f, &ts)?);
        }
    }
    let t_of = |r: &EvolutionResult| times.iter().position(|&t| t == r.t).unwrap_or(usize::MAX);
    out.sort_by_key(t_of);
    Ok(out)
}

fn evolve(config: &RunConfig, overrides: &Overrides, v: &Potential, out: &mut Output) -> Result<(), RunError> {
    let start = Instant::now();
    let method = overrides.evolution_method.clone().unwrap_or_else(|| config.evolution_method.clone());
    let times = overrides.times.clone().unwrap_or_else(|| config.evolution_times.clone());
    let tr = solver_transform(config, v)?;
    let rg = tr.radial_grid().clone();
    let (c, w, p) = (config.packet_center, config.packet_width, config.packet_momentum);
    let f = RadialFunction::from_fn(rg.clone(), |r| {
        C::new(0.0, p * r).exp() * (-(r - c).powi(2) / (2.0 * w * w)).exp()
    });
    let line = config.grids.evolution_line()?;

    // the spectral result is the reference for the other two
    let spectral: Vec<EvolutionResult> =
        times.iter().map(|&t| evolve_spectral(&tr, &f, t)).collect::<Result<_, _>>()?;
    let mut runs: Vec<EvolutionResult> = Vec::new();
    let wants = |m: EvolutionMethodChoice| method == EvolutionMethodChoice::All || method == m;
    if wants(EvolutionMethodChoice::Spectral) {
        runs.extend(spectral.iter().cloned());
    }
    if wants(EvolutionMethodChoice::Factorized) {
        for &t in &times {
            runs.push(evolve_factorized(&tr, &line, &f, t)?);
        }
    }
    if wants(EvolutionMethodChoice::CrankNicolson) {
        let cn = CrankNicolson::new(config.cn_dt, config.cn_spacing, config.cn_box)?;
        runs.extend(cn_snapshots(&cn, v, &f, &times)?);
    }

    let mut metrics = BTreeMap::new();
    let mut tolerances = Vec::new();
    let mut trace = Vec::new();
    for r in &runs {
        let i = times.iter().position(|&t| t == r.t).expect("run time comes from the list");
        let reference = &spectral[i].state;
        let err = r.state.distance(reference) / f.norm();
        let leakage = representer_of(&tr, &line, &r.state)?.leakage;
        let code = match r.method {
            crate::evolution::Method::Spectral => 0.0,
            crate::evolution::Method::Factorized => 1.0,
            crate::evolution::Method::CrankNicolson => 2.0,
        };
        trace.push(vec![r.t, code, r.state.norm(), r.norm_drift, leakage, err]);
        let name = r.method.name();
        metrics.insert(format!("{name}.t{:?}.norm_drift", r.t), r.norm_drift);
        metrics.insert(format!("{name}.t{:?}.leakage", r.t), leakage);
        if r.method != crate::evolution::Method::Spectral {
            metrics.insert(format!("{name}.t{:?}.error_vs_spectral", r.t), err);
            tolerances.push(Tolerance::max(format!("{name}.t{:?}.error_vs_spectral", r.t), 1e-3));
        }
        out.csv(
            &format!("evolve_{name}_t{:?}.csv", r.t),
            &["r", "Re value", "Im value"],
            complex_rows(r.state.grid.nodes(), &r.state.values),
        )?;
    }
    out.csv("evolve_trace.csv", &["t", "method", "norm", "norm_drift", "leakage", "error_vs_spectral"], trace)?;
    let mut params = base_parameters(v, &config.grids);
    params.insert("times".into(), times.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(","));
    params.insert("method_codes".into(), "0=spectral,1=factorized,2=cn".into());
    out.report(ExperimentReport::finish("evolve", params, metrics, tolerances, Vec::new(), start))
}

fn hardy(config: &RunConfig, overrides: &Overrides, v: &Potential, out: &mut Output) -> Result<(), RunError> {
    let start = Instant::now();
    let (side, count) = overrides.atoms.unwrap_or(config.hardy_atoms);
    let line = config.grids.line()?;
    let eg = config.grids.energy();
    let coords = line.coordinates(Domain::E);
    let window: Vec<usize> = (0..coords.len()).filter(|&j| coords[j].abs() <= ATOM_WINDOW).collect();
    let mut metrics = BTreeMap::new();
    let mut tolerances = Vec::new();
    let mut rows = Vec::new();
    for n in 0..count {
        let b = atom(side, n, &line);
        let norm = b.norm();
        let leak = hardy_projection(&b, side.opposite())?.norm() / norm;
        let p: SpectralFunction = positive_part(&b, &eg)?;
        metrics.insert(format!("atom{n}.norm"), norm);
        metrics.insert(format!("atom{n}.leakage"), leak);
        metrics.insert(format!("atom{n}.positive_part_norm"), p.norm());
        tolerances.push(Tolerance::max(format!("atom{n}.leakage"), 1e-3));
        rows.push(vec![n as f64, norm, leak, p.norm()]);
        let sampled: Vec<Vec<f64>> = window.iter().map(|&j| vec![coords[j], b.values[j].re, b.values[j].im]).collect();
        out.csv(&format!("hardy_atom{n}.csv"), &["coordinate", "Re", "Im"], sampled)?;
    }
    out.csv("hardy.csv", &["atom", "norm", "leakage", "positive_part_norm"], rows)?;
    let mut params = base_parameters(v, &config.grids);
    params.insert("halfplane".into(), format!("{side:?}").to_lowercase());
    params.insert("count".into(), count.to_string());
    out.report(ExperimentReport::finish("hardy", params, metrics, tolerances, Vec::new(), start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn numbers_carry_seventeen_digits() {
        let s = format_number(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        for x in [std::f64::consts::PI, -1e-300, 6.02e23, 0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn commands_parse_by_name() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("frobnicate".parse::<Command>().is_err());
    }

    #[test]
    fn log_energies_fall_back_to_linear_from_zero() {
        let mut c = parse_config("jost.points = 5\njost.e_min = 1\njost.e_max = 16").unwrap();
        let e = jost_energies(&c);
        assert!((e[2] - 4.0).abs() < 1e-12);
        c.jost_e_min = 0.0;
        assert_eq!(jost_energies(&c), vec![0.0, 4.0, 8.0, 12.0, 16.0]);
    }

    #[test]
    fn jost_from_zero_energy_is_a_guard() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse_config("jost.e_min = 0\njost.points = 3").unwrap();
        let ctx = RunContext { out_dir: dir.path().into(), base_dir: ".".into() };
        let r = run(Command::Jost, &c, &Overrides::default(), &ctx);
        assert_eq!(exit_code(&r), EXIT_GUARD);
        assert!(r.unwrap_err().to_string().starts_with("ZeroEnergy"));
    }

    #[test]
    fn roundtrip_grids_keep_panels_narrow() {
        let g = roundtrip_grids(&StudyGrids::default(), 640.0);
        assert_eq!(g.r_max, 640.0);
        assert!(g.k_max * g.r_max / g.k_panels as f64 <= ROUNDTRIP_PANEL_WIDTH);
    }
}
