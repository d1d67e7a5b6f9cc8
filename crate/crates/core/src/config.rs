//! Flat `section.key = value` run configuration.
//!
//! Every key is declared once in [`KEYS`] with its default and value rule;
//! parsing, validation, normalization and serialization all walk that table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiments::{DensityTarget, StudyGrids};
use crate::hardy::Side;
use crate::potential::{Potential, PotentialError};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("ParseError: line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("ValidationError: `{key}`: {reason}")]
    Validation { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Validation { key: key.to_string(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    /// Finite and > 0.
    Positive,
    /// Finite and ≥ 0.
    NonNegative,
    /// Any finite value (signed fields: box corners, momenta).
    Finite,
    /// Integer ≥ 1.
    Count,
    PowerOfTwo,
    Version,
    Choice(&'static [&'static str]),
    /// Comma list of finite values; may be empty.
    FloatList,
    /// Comma list of positive values; may be empty.
    PositiveList,
    /// Comma list of non-negative integers.
    IndexList,
    /// `halfplane:count`.
    AtomFamily,
    DensityTargets,
    /// Positive number or `auto`.
    AutoPositive,
    Text,
}

const KINDS: &[&str] = &["free", "square_well", "square_barrier", "piecewise_constant", "sampled_table"];

/// `(key, default, rule)` in canonical order.
const KEYS: &[(&str, &str, Rule)] = &[
    ("config_version", "1", Rule::Version),
    ("potential.kind", "free", Rule::Choice(KINDS)),
    ("potential.depth", "4.0", Rule::Positive),
    ("potential.radius", "2.0", Rule::Positive),
    ("potential.breaks", "", Rule::PositiveList),
    ("potential.values", "", Rule::FloatList),
    ("potential.table_path", "", Rule::Text),
    ("grids.k_max", "20.0", Rule::Positive),
    ("grids.k_panels", "256", Rule::Count),
    ("grids.r_max", "40.0", Rule::Positive),
    ("grids.r_panels", "512", Rule::Count),
    ("grids.nodes_per_panel", "8", Rule::Count),
    ("grids.line_N", "4194304", Rule::PowerOfTwo),
    ("grids.line_Emax", "131072.0", Rule::Positive),
    ("grids.evolution_line_N", "262144", Rule::PowerOfTwo),
    ("grids.evolution_line_Emax", "512.0", Rule::Positive),
    ("tolerances.ode", "1e-10", Rule::Positive),
    ("tolerances.newton_residual", "1e-8", Rule::Positive),
    ("tolerances.contour_guard", "1e-6", Rule::Positive),
    ("jost.e_min", "0.01", Rule::NonNegative),
    ("jost.e_max", "100.0", Rule::Positive),
    ("jost.points", "50", Rule::Count),
    ("jost.spacing", "log", Rule::Choice(&["log", "linear"])),
    ("resonances.re_min", "0.1", Rule::Finite),
    ("resonances.re_max", "6.0", Rule::Finite),
    ("resonances.im_min", "-2.0", Rule::Finite),
    ("resonances.im_max", "-0.01", Rule::Finite),
    ("resonances.max_count", "64", Rule::Count),
    ("transform.center", "5.0", Rule::Positive),
    ("transform.width", "1.0", Rule::Positive),
    ("evolution.method", "all", Rule::Choice(&["all", "spectral", "factorized", "cn"])),
    ("evolution.times", "0.5,1.0,2.0,5.0", Rule::FloatList),
    ("evolution.packet_center", "20.0", Rule::Positive),
    ("evolution.packet_momentum", "-2.0", Rule::Finite),
    ("evolution.packet_width", "2.0", Rule::Positive),
    ("evolution.cn_dt", "0.001", Rule::Positive),
    ("evolution.cn_spacing", "0.00390625", Rule::Positive),
    ("evolution.cn_box", "auto", Rule::AutoPositive),
    ("hardy.atoms", "minus:5", Rule::AtomFamily),
    ("density.atom_count", "64", Rule::Count),
    ("density.targets", "gaussian_bump,exponential", Rule::DensityTargets),
    ("roundtrip.atoms", "0,1,2,3,4", Rule::IndexList),
    ("roundtrip.r_max", "640.0", Rule::Positive),
    ("asymmetry.atoms", "0,1,2,3,4", Rule::IndexList),
    ("asymmetry.times", "0.5,1.0,5.0,-1.0", Rule::FloatList),
    ("output.dir", "out", Rule::Text),
];

fn rule_of(key: &str) -> Option<Rule> {
    KEYS.iter().find(|(k, ..)| *k == key).map(|&(_, _, r)| r)
}

fn float(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let x: f64 = raw.parse().map_err(|_| ConfigError::invalid(key, format!("`{raw}` is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::invalid(key, "must be finite"));
    }
    Ok(x)
}

fn split(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Checks `raw` against the key's rule and returns its canonical spelling.
fn canonical(key: &str, rule: Rule, raw: &str) -> Result<String, ConfigError> {
    let raw = raw.trim();
    let fmt = |x: f64| format!("{x:?}");
    Ok(match rule {
        Rule::Positive | Rule::NonNegative | Rule::Finite => {
            let x = float(key, raw)?;
            if rule == Rule::Positive && x <= 0.0 {
                return Err(ConfigError::invalid(key, "must be positive"));
            }
            if rule == Rule::NonNegative && x < 0.0 {
                return Err(ConfigError::invalid(key, "must be non-negative"));
            }
            fmt(x)
        }
        Rule::Count | Rule::PowerOfTwo | Rule::Version => {
            let n: usize =
                raw.parse().map_err(|_| ConfigError::invalid(key, format!("`{raw}` is not a positive integer")))?;
            if n == 0 {
                return Err(ConfigError::invalid(key, "must be positive"));
            }
            if rule == Rule::PowerOfTwo && !n.is_power_of_two() {
                return Err(ConfigError::invalid(key, format!("{n} is not a power of two")));
            }
            if rule == Rule::Version && n != CONFIG_VERSION as usize {
                return Err(ConfigError::invalid(key, format!("unsupported version {n}, expected {CONFIG_VERSION}")));
            }
            n.to_string()
        }
        Rule::Choice(options) => {
            if !options.contains(&raw) {
                return Err(ConfigError::invalid(key, format!("`{raw}` is not one of {}", options.join(", "))));
            }
            raw.to_string()
        }
        Rule::FloatList | Rule::PositiveList => {
            let xs = split(raw).map(|s| float(key, s)).collect::<Result<Vec<_>, _>>()?;
            if rule == Rule::PositiveList && xs.iter().any(|&x| x <= 0.0) {
                return Err(ConfigError::invalid(key, "entries must be positive"));
            }
            xs.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(",")
        }
        Rule::IndexList => {
            let ns = split(raw)
                .map(|s| s.parse::<usize>().map_err(|_| ConfigError::invalid(key, format!("`{s}` is not an index"))))
                .collect::<Result<Vec<_>, _>>()?;
            if ns.is_empty() {
                return Err(ConfigError::invalid(key, "needs at least one index"));
            }
            ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        }
        Rule::AtomFamily => {
            let (side, count) = parse_atom_family(raw).map_err(|e| ConfigError::invalid(key, e))?;
            format!("{}:{count}", side_name(side))
        }
        Rule::DensityTargets => {
            let ts = split(raw)
                .map(|s| s.parse::<DensityTarget>().map_err(|e| ConfigError::invalid(key, e)))
                .collect::<Result<Vec<_>, _>>()?;
            if ts.is_empty() {
                return Err(ConfigError::invalid(key, "needs at least one target"));
            }
            ts.iter().map(|t| t.label()).collect::<Vec<_>>().join(",")
        }
        Rule::AutoPositive => {
            if raw == "auto" {
                raw.to_string()
            } else {
                canonical(key, Rule::Positive, raw)?
            }
        }
        Rule::Text => raw.to_string(),
    })
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Minus => "minus",
        Side::Plus => "plus",
    }
}

/// `minus:5` → (Minus, 5). Also accepts `-`/`+`.
pub fn parse_atom_family(raw: &str) -> Result<(Side, usize), String> {
    let (side, count) = raw.split_once(':').ok_or_else(|| format!("`{raw}` is not halfplane:count"))?;
    let side = match side.trim() {
        "minus" | "-" => Side::Minus,
        "plus" | "+" => Side::Plus,
        other => return Err(format!("unknown halfplane `{other}`")),
    };
    let count: usize = count.trim().parse().map_err(|_| format!("`{count}` is not a count"))?;
    if count == 0 {
        return Err("atom count must be positive".into());
    }
    Ok((side, count))
}

/// Key → raw value, with the line each key came from. No value checks.
fn read_lines(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line: line_no, reason: format!("expected `key = value`, got `{content}`") })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Parse { line: line_no, reason: format!("bad key `{key}`") });
        }
        if rule_of(key).is_none() {
            return Err(ConfigError::Parse { line: line_no, reason: format!("unknown key `{key}`") });
        }
        if out.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
            return Err(ConfigError::Parse { line: line_no, reason: format!("duplicate key `{key}`") });
        }
    }
    Ok(out)
}

/// Canonical text: every key in table order, defaults filled in, values in
/// canonical spelling, comments dropped.
pub fn normalize(text: &str) -> Result<String, ConfigError> {
    let given = read_lines(text)?;
    let mut out = String::new();
    for &(key, default, rule) in KEYS {
        let raw = given.get(key).map_or(default, |(_, v)| v.as_str());
        out.push_str(&format!("{key} = {}\n", canonical(key, rule, raw)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free { radius: f64 },
    SquareWell { depth: f64, radius: f64 },
    SquareBarrier { height: f64, radius: f64 },
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    SampledTable { path: PathBuf },
}

impl PotentialSpec {
    /// Relative table paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Potential, PotentialError> {
        match self {
            PotentialSpec::Free { radius } => Potential::free(*radius),
            PotentialSpec::SquareWell { depth, radius } => Potential::square_well(*depth, *radius),
            PotentialSpec::SquareBarrier { height, radius } => Potential::square_barrier(*height, *radius),
            PotentialSpec::PiecewiseConstant { breaks, values } => {
                Potential::piecewise_constant(breaks.clone(), values.clone())
            }
            PotentialSpec::SampledTable { path } => Potential::from_csv(&base.join(path)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionMethodChoice {
    All,
    Spectral,
    Factorized,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grids: StudyGrids,
    pub ode_tol: f64,
    pub newton_residual: f64,
    pub contour_guard: f64,
    pub jost_e_min: f64,
    pub jost_e_max: f64,
    pub jost_points: usize,
    pub jost_log_spacing: bool,
    pub resonance_re: (f64, f64),
    pub resonance_im: (f64, f64),
    pub resonance_max_count: usize,
    pub transform_center: f64,
    pub transform_width: f64,
    pub evolution_method: EvolutionMethodChoice,
    pub evolution_times: Vec<f64>,
    pub packet_center: f64,
    pub packet_momentum: f64,
    pub packet_width: f64,
    pub cn_dt: f64,
    pub cn_spacing: f64,
    pub cn_box: Option<f64>,
    pub hardy_atoms: (Side, usize),
    pub density_atom_count: usize,
    pub density_targets: Vec<DensityTarget>,
    pub roundtrip_atoms: Vec<usize>,
    pub roundtrip_r_max: f64,
    pub asymmetry_atoms: Vec<usize>,
    pub asymmetry_times: Vec<f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

struct Values(BTreeMap<&'static str, String>);

impl Values {
    fn s(&self, key: &str) -> &str {
        &self.0[key]
    }
    fn f(&self, key: &str) -> f64 {
        self.0[key].parse().expect("validated")
    }
    fn n(&self, key: &str) -> usize {
        self.0[key].parse().expect("validated")
    }
    fn fl(&self, key: &str) -> Vec<f64> {
        split(&self.0[key]).map(|s| s.parse().expect("validated")).collect()
    }
    fn nl(&self, key: &str) -> Vec<usize> {
        split(&self.0[key]).map(|s| s.parse().expect("validated")).collect()
    }
}

/// Parses and validates; omitted keys take their defaults, each echoed to the log.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let given = read_lines(text)?;
    let mut values = BTreeMap::new();
    for &(key, default, rule) in KEYS {
        let raw = match given.get(key) {
            Some((_, v)) => v.as_str(),
            None => {
                log::info!("config default: {key} = {default}");
                default
            }
        };
        values.insert(key, canonical(key, rule, raw)?);
    }
    let v = Values(values);

    let radius = v.f("potential.radius");
    let potential = match v.s("potential.kind") {
        "free" => PotentialSpec::Free { radius },
        "square_well" => PotentialSpec::SquareWell { depth: v.f("potential.depth"), radius },
        "square_barrier" => PotentialSpec::SquareBarrier { height: v.f("potential.depth"), radius },
        "piecewise_constant" => {
            let (breaks, vals) = (v.fl("potential.breaks"), v.fl("potential.values"));
            if breaks.is_empty() || breaks.len() != vals.len() {
                return Err(ConfigError::invalid("potential.values", "needs one value per entry of potential.breaks"));
            }
            PotentialSpec::PiecewiseConstant { breaks, values: vals }
        }
        _ => {
            let path = v.s("potential.table_path");
            if path.is_empty() {
                return Err(ConfigError::invalid("potential.table_path", "required for sampled_table"));
            }
            PotentialSpec::SampledTable { path: PathBuf::from(path) }
        }
    };

    let (e_min, e_max) = (v.f("jost.e_min"), v.f("jost.e_max"));
    if e_min >= e_max {
        return Err(ConfigError::invalid("jost.e_min", "must be below jost.e_max"));
    }
    let re = (v.f("resonances.re_min"), v.f("resonances.re_max"));
    let im = (v.f("resonances.im_min"), v.f("resonances.im_max"));
    if re.0 >= re.1 {
        return Err(ConfigError::invalid("resonances.re_min", "must be below resonances.re_max"));
    }
    if im.0 >= im.1 || im.1 >= 0.0 {
        return Err(ConfigError::invalid("resonances.im_max", "box must satisfy im_min < im_max < 0"));
    }

    let cn_box = match v.s("evolution.cn_box") {
        "auto" => None,
        _ => Some(v.f("evolution.cn_box")),
    };
    let method = match v.s("evolution.method") {
        "spectral" => EvolutionMethodChoice::Spectral,
        "factorized" => EvolutionMethodChoice::Factorized,
        "cn" => EvolutionMethodChoice::CrankNicolson,
        _ => EvolutionMethodChoice::All,
    };

    Ok(RunConfig {
        potential,
        grids: StudyGrids {
            k_max: v.f("grids.k_max"),
            k_panels: v.n("grids.k_panels"),
            r_max: v.f("grids.r_max"),
            r_panels: v.n("grids.r_panels"),
            nodes_per_panel: v.n("grids.nodes_per_panel"),
            line_n: v.n("grids.line_N"),
            line_e_max: v.f("grids.line_Emax"),
            evolution_line_n: v.n("grids.evolution_line_N"),
            evolution_line_e_max: v.f("grids.evolution_line_Emax"),
        },
        ode_tol: v.f("tolerances.ode"),
        newton_residual: v.f("tolerances.newton_residual"),
        contour_guard: v.f("tolerances.contour_guard"),
        jost_e_min: e_min,
        jost_e_max: e_max,
        jost_points: v.n("jost.points"),
        jost_log_spacing: v.s("jost.spacing") == "log",
        resonance_re: re,
        resonance_im: im,
        resonance_max_count: v.n("resonances.max_count"),
        transform_center: v.f("transform.center"),
        transform_width: v.f("transform.width"),
        evolution_method: method,
        evolution_times: v.fl("evolution.times"),
        packet_center: v.f("evolution.packet_center"),
        packet_momentum: v.f("evolution.packet_momentum"),
        packet_width: v.f("evolution.packet_width"),
        cn_dt: v.f("evolution.cn_dt"),
        cn_spacing: v.f("evolution.cn_spacing"),
        cn_box,
        hardy_atoms: parse_atom_family(v.s("hardy.atoms")).expect("validated"),
        density_atom_count: v.n("density.atom_count"),
        density_targets: split(v.s("density.targets")).map(|s| s.parse().expect("validated")).collect(),
        roundtrip_atoms: v.nl("roundtrip.atoms"),
        roundtrip_r_max: v.f("roundtrip.r_max"),
        asymmetry_atoms: v.nl("asymmetry.atoms"),
        asymmetry_times: v.fl("asymmetry.times"),
        output_dir: PathBuf::from(v.s("output.dir")),
    })
}

/// Writes every key, so `parse_config(serialize(c)) == c`.
pub fn serialize(c: &RunConfig) -> String {
    let f = |x: f64| format!("{x:?}");
    let fl = |xs: &[f64]| xs.iter().map(|&x| f(x)).collect::<Vec<_>>().join(",");
    let nl = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let defaults: BTreeMap<&str, &str> = KEYS.iter().map(|&(k, d, _)| (k, d)).collect();
    let mut m: BTreeMap<&str, String> = BTreeMap::new();
    m.insert("config_version", CONFIG_VERSION.to_string());
    let (kind, depth, radius) = match &c.potential {
        PotentialSpec::Free { radius } => ("free", None, Some(*radius)),
        PotentialSpec::SquareWell { depth, radius } => ("square_well", Some(*depth), Some(*radius)),
        PotentialSpec::SquareBarrier { height, radius } => ("square_barrier", Some(*height), Some(*radius)),
        PotentialSpec::PiecewiseConstant { breaks, values } => {
            m.insert("potential.breaks", fl(breaks));
            m.insert("potential.values", fl(values));
            ("piecewise_constant", None, None)
        }
        PotentialSpec::SampledTable { path } => {
            m.insert("potential.table_path", path.display().to_string());
            ("sampled_table", None, None)
        }
    };
    m.insert("potential.kind", kind.into());
    if let Some(d) = depth {
        m.insert("potential.depth", f(d));
    }
    if let Some(r) = radius {
        m.insert("potential.radius", f(r));
    }
    let g = &c.grids;
    m.insert("grids.k_max", f(g.k_max));
    m.insert("grids.k_panels", g.k_panels.to_string());
    m.insert("grids.r_max", f(g.r_max));
    m.insert("grids.r_panels", g.r_panels.to_string());
    m.insert("grids.nodes_per_panel", g.nodes_per_panel.to_string());
    m.insert("grids.line_N", g.line_n.to_string());
    m.insert("grids.line_Emax", f(g.line_e_max));
    m.insert("grids.evolution_line_N", g.evolution_line_n.to_string());
    m.insert("grids.evolution_line_Emax", f(g.evolution_line_e_max));
    m.insert("tolerances.ode", f(c.ode_tol));
    m.insert("tolerances.newton_residual", f(c.newton_residual));
    m.insert("tolerances.contour_guard", f(c.contour_guard));
    m.insert("jost.e_min", f(c.jost_e_min));
    m.insert("jost.e_max", f(c.jost_e_max));
    m.insert("jost.points", c.jost_points.to_string());
    m.insert("jost.spacing", if c.jost_log_spacing { "log" } else { "linear" }.into());
    m.insert("resonances.re_min", f(c.resonance_re.0));
    m.insert("resonances.re_max", f(c.resonance_re.1));
    m.insert("resonances.im_min", f(c.resonance_im.0));
    m.insert("resonances.im_max", f(c.resonance_im.1));
    m.insert("resonances.max_count", c.resonance_max_count.to_string());
    m.insert("transform.center", f(c.transform_center));
    m.insert("transform.width", f(c.transform_width));
    m.insert(
        "evolution.method",
        match c.evolution_method {
            EvolutionMethodChoice::All => "all",
            EvolutionMethodChoice::Spectral => "spectral",
            EvolutionMethodChoice::Factorized => "factorized",
            EvolutionMethodChoice::CrankNicolson => "cn",
        }
        .into(),
    );
    m.insert("evolution.times", fl(&c.evolution_times));
    m.insert("evolution.packet_center", f(c.packet_center));
    m.insert("evolution.packet_momentum", f(c.packet_momentum));
    m.insert("evolution.packet_width", f(c.packet_width));
    m.insert("evolution.cn_dt", f(c.cn_dt));
    m.insert("evolution.cn_spacing", f(c.cn_spacing));
    m.insert("evolution.cn_box", c.cn_box.map_or("auto".to_string(), f));
    m.insert("hardy.atoms", format!("{}:{}", side_name(c.hardy_atoms.0), c.hardy_atoms.1));
    m.insert("density.atom_count", c.density_atom_count.to_string());
    m.insert("density.targets", c.density_targets.iter().map(|t| t.label()).collect::<Vec<_>>().join(","));
    m.insert("roundtrip.atoms", nl(&c.roundtrip_atoms));
    m.insert("roundtrip.r_max", f(c.roundtrip_r_max));
    m.insert("asymmetry.atoms", nl(&c.asymmetry_atoms));
    m.insert("asymmetry.times", fl(&c.asymmetry_times));
    m.insert("output.dir", c.output_dir.display().to_string());

    let mut out = String::new();
    for &(key, ..) in KEYS {
        let value = m.get(key).cloned().unwrap_or_else(|| defaults[key].to_string());
        out.push_str(&format!("{key} = {value}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kind_alone_gives_defaults() {
        let c = parse_config("potential.kind = free\n").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.grids, StudyGrids::default());
        assert_eq!(c.potential, PotentialSpec::Free { radius: 2.0 });
    }

    #[test]
    fn non_power_of_two_line_grid_is_rejected() {
        let err = parse_config("grids.line_N = 1000").unwrap_err();
        assert!(matches!(&err, ConfigError::Validation { key, .. } if key == "grids.line_N"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("# comment\n\npotential.kind = free\nnot a pair\n").unwrap_err();
        assert_eq!(err, ConfigError::Parse { line: 4, reason: "expected `key = value`, got `not a pair`".into() });
        let err = parse_config("grids.bogus = 3").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        assert!(matches!(parse_config("a = 1\na = 2"), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn validation_names_the_key() {
        for (text, key) in [
            ("grids.k_max = -1", "grids.k_max"),
            ("grids.r_panels = 0", "grids.r_panels"),
            ("potential.kind = delta", "potential.kind"),
            ("config_version = 2", "config_version"),
            ("resonances.im_max = 0.5", "resonances.im_max"),
            ("potential.kind = sampled_table", "potential.table_path"),
            ("hardy.atoms = up:3", "hardy.atoms"),
        ] {
            match parse_config(text) {
                Err(ConfigError::Validation { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn square_well_config_round_trips() {
        let text = "# well\npotential.kind = square_well\npotential.depth = 10\npotential.radius=1\n\
                    grids.k_panels = 128 # coarse\njost.spacing = linear\nevolution.times = 1, 2\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.potential, PotentialSpec::SquareWell { depth: 10.0, radius: 1.0 });
        assert_eq!(serialize(&c), normalize(text).unwrap());
        assert_eq!(parse_config(&serialize(&c)).unwrap(), c);
        assert_eq!(normalize(&normalize(text).unwrap()).unwrap(), normalize(text).unwrap());
    }

    #[test]
    fn piecewise_needs_matching_lists() {
        let c = parse_config("potential.kind = piecewise_constant\npotential.breaks = 1,2\npotential.values = 3,-1").unwrap();
        assert_eq!(c.potential, PotentialSpec::PiecewiseConstant { breaks: vec![1.0, 2.0], values: vec![3.0, -1.0] });
        assert_eq!(serialize(&c), normalize(&serialize(&c)).unwrap());
        assert!(parse_config("potential.kind = piecewise_constant\npotential.breaks = 1,2\npotential.values = 3").is_err());
    }

    proptest! {
        #[test]
        fn serialize_parse_is_identity(k_max in 0.5f64..100.0, panels in 1usize..5000, e_min in 0.0f64..1.0, p in 1usize..20) {
            let text = format!("grids.k_max = {k_max}\ngrids.k_panels = {panels}\njost.e_min = {e_min}\ngrids.line_N = {}\n", 1usize << p);
            let c = parse_config(&text).unwrap();
            prop_assert_eq!(parse_config(&serialize(&c)).unwrap(), c.clone());
            prop_assert_eq!(serialize(&c), normalize(&text).unwrap());
        }
    }
}
