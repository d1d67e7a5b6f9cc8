//! Reproducible experiments packaged as pass/fail reports.
//!
//! Every report carries the full parameter block it was produced from, so
//! [`rerun`] can rebuild it from its own serialization.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{hardy_leakage, representer_of, EvolutionError};
use crate::hardy::{atom, atom_value, positive_part, HardyError, LineGrid, Side};
use crate::potential::Potential;
use crate::spectral::{EnergyGrid, RadialGrid, SpectralError, SpectralFunction, SpectralTransform};

type C = Complex64;

/// Gram condition number above which the density study flags the design.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Tikhonov parameter for the coefficient solve of an ill-conditioned design.
pub const REGULARIZATION: f64 = 1e-10;
/// Acceptance constant: relative best-approximation error at the largest N.
pub const DENSITY_THRESHOLD: f64 = 0.05;
pub const ROUNDTRIP_TOL: f64 = 1e-3;
pub const FORWARD_LEAKAGE_TOL: f64 = 2e-3;
pub const INITIAL_LEAKAGE_TOL: f64 = 1e-3;
pub const BACKWARD_LEAKAGE_MIN: f64 = 1e-2;
/// Panel width, in units of `1/r_max` (k) and `1/k_max` (r), for round trips.
pub const ROUNDTRIP_PANEL_WIDTH: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("bad experiment parameter `{key}`: {reason}")]
    Parameter { key: String, reason: String },
    #[error("unknown experiment `{0}`")]
    Unknown(String),
}

impl ExperimentError {
    pub fn guard(&self) -> Option<&'static str> {
        match self {
            ExperimentError::Spectral(e) => e.guard(),
            ExperimentError::Hardy(e) => e.guard(),
            ExperimentError::Evolution(e) => e.guard(),
            _ => None,
        }
    }

    fn param(key: &str, reason: impl Into<String>) -> Self {
        ExperimentError::Parameter { key: key.to_string(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// metric ≤ value
    Max,
    /// metric ≥ value
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub metric: String,
    pub bound: Bound,
    pub value: f64,
}

impl Tolerance {
    pub fn max(metric: impl Into<String>, value: f64) -> Self {
        Self { metric: metric.into(), bound: Bound::Max, value }
    }

    pub fn min(metric: impl Into<String>, value: f64) -> Self {
        Self { metric: metric.into(), bound: Bound::Min, value }
    }

    /// A missing or NaN metric never satisfies a tolerance.
    pub fn holds(&self, metrics: &BTreeMap<String, f64>) -> bool {
        match metrics.get(&self.metric) {
            Some(&m) if !m.is_nan() => match self.bound {
                Bound::Max => m <= self.value,
                Bound::Min => m >= self.value,
            },
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub tolerances: Vec<Tolerance>,
    pub passed: bool,
    /// Seconds.
    pub runtime: f64,
    /// Conditions reported without failing the run, e.g. `IllConditioned`.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn finish(
        name: &str,
        parameters: BTreeMap<String, String>,
        metrics: BTreeMap<String, f64>,
        tolerances: Vec<Tolerance>,
        notes: Vec<String>,
        start: Instant,
    ) -> Self {
        let passed = tolerances.iter().all(|t| t.holds(&metrics));
        Self {
            name: name.to_string(),
            parameters,
            metrics,
            tolerances,
            passed,
            runtime: start.elapsed().as_secs_f64(),
            notes,
        }
    }

    pub fn failures(&self) -> Vec<&Tolerance> {
        self.tolerances.iter().filter(|t| !t.holds(&self.metrics)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Grid sizes shared by the studies; round-trips through a parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyGrids {
    pub k_max: f64,
    pub k_panels: usize,
    pub r_max: f64,
    pub r_panels: usize,
    pub nodes_per_panel: usize,
    pub line_n: usize,
    pub line_e_max: f64,
    pub evolution_line_n: usize,
    pub evolution_line_e_max: f64,
}

impl Default for StudyGrids {
    fn default() -> Self {
        let line = LineGrid::default();
        let evo = LineGrid::evolution_default();
        Self {
            k_max: EnergyGrid::DEFAULT_K_MAX,
            k_panels: EnergyGrid::DEFAULT_PANELS,
            r_max: RadialGrid::DEFAULT_R_MAX,
            r_panels: RadialGrid::DEFAULT_PANELS,
            nodes_per_panel: EnergyGrid::DEFAULT_NODES,
            line_n: line.len(),
            line_e_max: line.e_max(),
            evolution_line_n: evo.len(),
            evolution_line_e_max: evo.e_max(),
        }
    }
}

impl StudyGrids {
    /// Grids for `Ψ(Ψ⁻¹p)` with `p(0) ≠ 0`. `Ψ⁻¹p` then decays like
    /// `r^{−3/2}`, so the truncation error is ~`0.4/r_max`; panels are
    /// narrow enough that 8 nodes resolve `sin kr` on both sides.
    pub fn for_roundtrip(r_max: f64) -> Self {
        let base = Self::default();
        let panels = (base.k_max * r_max / ROUNDTRIP_PANEL_WIDTH).ceil() as usize;
        Self { r_max, k_panels: panels, r_panels: panels, ..base }
    }

    pub fn energy(&self) -> Arc<EnergyGrid> {
        Arc::new(EnergyGrid::new(self.k_max, self.k_panels, self.nodes_per_panel))
    }

    pub fn radial(&self, v: &Potential) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::for_potential(v, self.r_max, self.r_panels, self.nodes_per_panel))
    }

    pub fn line(&self) -> Result<Arc<LineGrid>, HardyError> {
        Ok(Arc::new(LineGrid::new(self.line_n, self.line_e_max)?))
    }

    pub fn evolution_line(&self) -> Result<Arc<LineGrid>, HardyError> {
        Ok(Arc::new(LineGrid::new(self.evolution_line_n, self.evolution_line_e_max)?))
    }

    pub fn write(&self, p: &mut BTreeMap<String, String>) {
        p.insert("grids.k_max".into(), fmt(self.k_max));
        p.insert("grids.k_panels".into(), self.k_panels.to_string());
        p.insert("grids.r_max".into(), fmt(self.r_max));
        p.insert("grids.r_panels".into(), self.r_panels.to_string());
        p.insert("grids.nodes_per_panel".into(), self.nodes_per_panel.to_string());
        p.insert("grids.line_N".into(), self.line_n.to_string());
        p.insert("grids.line_Emax".into(), fmt(self.line_e_max));
        p.insert("grids.evolution_line_N".into(), self.evolution_line_n.to_string());
        p.insert("grids.evolution_line_Emax".into(), fmt(self.evolution_line_e_max));
    }

    fn read(p: &BTreeMap<String, String>) -> Result<Self, ExperimentError> {
        Ok(Self {
            k_max: get(p, "grids.k_max")?,
            k_panels: get(p, "grids.k_panels")?,
            r_max: get(p, "grids.r_max")?,
            r_panels: get(p, "grids.r_panels")?,
            nodes_per_panel: get(p, "grids.nodes_per_panel")?,
            line_n: get(p, "grids.line_N")?,
            line_e_max: get(p, "grids.line_Emax")?,
            evolution_line_n: get(p, "grids.evolution_line_N")?,
            evolution_line_e_max: get(p, "grids.evolution_line_Emax")?,
        })
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn get<T: std::str::FromStr>(p: &BTreeMap<String, String>, key: &str) -> Result<T, ExperimentError> {
    let raw = p.get(key).ok_or_else(|| ExperimentError::param(key, "missing"))?;
    raw.parse().map_err(|_| ExperimentError::param(key, format!("cannot parse `{raw}`")))
}

fn list<T: std::str::FromStr>(p: &BTreeMap<String, String>, key: &str) -> Result<Vec<T>, ExperimentError> {
    let raw = p.get(key).ok_or_else(|| ExperimentError::param(key, "missing"))?;
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| ExperimentError::param(key, format!("cannot parse `{s}`"))))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_potential(v: &Potential, p: &mut BTreeMap<String, String>) {
    p.insert("potential".into(), serde_json::to_string(v).expect("potential serializes"));
}

fn read_potential(p: &BTreeMap<String, String>) -> Result<Potential, ExperimentError> {
    let raw = p.get("potential").ok_or_else(|| ExperimentError::param("potential", "missing"))?;
    serde_json::from_str(raw).map_err(|e| ExperimentError::param("potential", e.to_string()))
}

// ---------------------------------------------------------------------------
// density

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityTarget {
    /// `e^{−(E−2)²/2}`
    GaussianBump,
    /// `e^{−E}`
    Exponential,
    /// Positive part of `atom(−, n)`; lies in the span once `N > n`.
    Atom(usize),
}

impl DensityTarget {
    /// The versioned default target set.
    pub const DEFAULTS: [DensityTarget; 2] = [DensityTarget::GaussianBump, DensityTarget::Exponential];

    pub fn label(self) -> String {
        match self {
            DensityTarget::GaussianBump => "gaussian_bump".into(),
            DensityTarget::Exponential => "exponential".into(),
            DensityTarget::Atom(n) => format!("atom{n}"),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian_bump" => Some(DensityTarget::GaussianBump),
            "exponential" => Some(DensityTarget::Exponential),
            _ => s.strip_prefix("atom")?.parse().ok().map(DensityTarget::Atom),
        }
    }
}

impl std::str::FromStr for DensityTarget {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::parse(s).ok_or_else(|| format!("unknown density target `{s}`"))
    }
}

impl std::fmt::Display for DensityTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// `1, 2, 4, …` up to and including `n`.
pub fn doubling_counts(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = 1;
    while m < n {
        out.push(m);
        m *= 2;
    }
    out.push(n);
    out
}

/// Extreme singular values of an upper-triangular `R` by power and inverse
/// iteration on `RᴴR`. Zero on the diagonal gives `σ_min = 0`.
fn singular_extremes(r: &DMatrix<C>) -> (f64, f64) {
    let n = r.ncols();
    let start = DVector::<C>::from_fn(n, |i, _| C::new(1.0 + 0.1 * i as f64, 0.0));
    let mut x = start.normalize();
    let mut smax = 0.0;
    for _ in 0..100 {
        let y = r.adjoint() * (r * &x);
        smax = y.norm().sqrt();
        if smax == 0.0 {
            return (0.0, 0.0);
        }
        x = y.normalize();
    }
    let mut x = start.normalize();
    let mut smin = 0.0;
    for _ in 0..100 {
        let Some(y) = r.adjoint().solve_lower_triangular(&x) else { return (smax, 0.0) };
        let Some(z) = r.solve_upper_triangular(&y) else { return (smax, 0.0) };
        let zn = z.norm();
        if !zn.is_finite() || zn == 0.0 {
            return (smax, 0.0);
        }
        smin = 1.0 / zn.sqrt();
        x = z / C::new(zn, 0.0);
    }
    (smax, smin)
}

struct NestedFit {
    /// `err(N')/‖b‖` for each requested count.
    errors: Vec<f64>,
    coefficient_norm: f64,
}

/// Least squares over nested leading column sets of `a` from a single
/// Householder QR: the residual for the first `N'` columns is the tail of
/// `Qᴴb` beyond `N'` plus the part of `b` outside the full span.
fn nested_fit(a: &DMatrix<C>, b: &DVector<C>, counts: &[usize], regularize: bool) -> NestedFit {
    let n = a.ncols();
    let qr = a.clone().qr();
    let q = qr.q();
    let qb = q.adjoint() * b;
    let outside = (b - &q * &qb).norm_squared();
    let bn = b.norm();
    // suffix sums of nonnegative terms: nonincreasing in N' in floating point too
    let mut tail = vec![0.0; n + 1];
    for j in (0..n).rev() {
        tail[j] = tail[j + 1] + qb[j].norm_sqr();
    }
    let errors = counts
        .iter()
        .map(|&m| if bn == 0.0 { 0.0 } else { (tail[m.min(n)] + outside).sqrt() / bn })
        .collect();
    let coefficients = if regularize {
        let mut aug = DMatrix::<C>::zeros(a.nrows() + n, n);
        aug.rows_mut(0, a.nrows()).copy_from(a);
        for j in 0..n {
            aug[(a.nrows() + j, j)] = C::new(REGULARIZATION.sqrt(), 0.0);
        }
        let mut rhs = DVector::<C>::zeros(a.nrows() + n);
        rhs.rows_mut(0, a.nrows()).copy_from(b);
        let qr = aug.qr();
        let qb = qr.q().adjoint() * rhs;
        qr.r().solve_upper_triangular(&qb)
    } else {
        qr.r().solve_upper_triangular(&qb)
    };
    NestedFit { errors, coefficient_norm: coefficients.map_or(f64::INFINITY, |c| c.norm()) }
}

/// Best approximation of each target from `span{positive_part(atom(−,n)) : n < N}`
/// in `L²(dE)` on the spectral grid of `v`.
pub fn hardy_density_study(
    v: &Potential,
    atom_count: usize,
    targets: &[DensityTarget],
    grids: &StudyGrids,
) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    if atom_count == 0 {
        return Err(ExperimentError::param("atom_count", "must be at least 1"));
    }
    let eg = grids.energy();
    let weights: Vec<f64> = eg.weights().iter().map(|u| u.sqrt()).collect();
    // Restriction to E ≥ 0 evaluated at the nodes directly: the atoms' phase
    // turns at rate 2n/(1+E²), which a line grid of ΔE = 1/16 undersamples
    // near threshold once n ≳ 10.
    let a = DMatrix::<C>::from_fn(eg.len(), atom_count, |i, n| {
        atom_value(Side::Minus, n, eg.energies()[i]) * weights[i]
    });

    let (smax, smin) = singular_extremes(&a.clone().qr().r());
    let gram_condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    let ill = !(gram_condition <= GRAM_CONDITION_LIMIT);
    let mut notes = Vec::new();
    if ill {
        let msg = format!(
            "IllConditioned: Gram condition {gram_condition:.3e} exceeds {GRAM_CONDITION_LIMIT:e}; \
             coefficients solved with regularization {REGULARIZATION:e}"
        );
        log::warn!("{msg}");
        notes.push(msg);
    }

    let counts = doubling_counts(atom_count);
    let mut metrics = BTreeMap::new();
    let mut tolerances = Vec::new();
    metrics.insert("gram_condition".into(), gram_condition);
    metrics.insert("ill_conditioned".into(), if ill { 1.0 } else { 0.0 });
    for &target in targets {
        let label = target.label();
        let g = match target {
            DensityTarget::GaussianBump => {
                SpectralFunction::from_fn(eg.clone(), |e| C::new((-(e - 2.0).powi(2) / 2.0).exp(), 0.0))
            }
            DensityTarget::Exponential => SpectralFunction::from_fn(eg.clone(), |e| C::new((-e).exp(), 0.0)),
            DensityTarget::Atom(n) => SpectralFunction::from_fn(eg.clone(), |e| atom_value(Side::Minus, n, e)),
        };
        let b = DVector::<C>::from_fn(eg.len(), |i, _| g.values[i] * weights[i]);
        let fit = nested_fit(&a, &b, &counts, ill);
        let mut worst_increase: f64 = 0.0;
        for (i, (&m, &err)) in counts.iter().zip(&fit.errors).enumerate() {
            metrics.insert(format!("{label}.err_N{m}"), err);
            if i > 0 {
                worst_increase = worst_increase.max(err - fit.errors[i - 1]);
            }
        }
        metrics.insert(format!("{label}.max_increase"), worst_increase);
        metrics.insert(format!("{label}.coefficient_norm"), fit.coefficient_norm);
        tolerances.push(Tolerance::max(format!("{label}.max_increase"), 0.0));
        let threshold = match target {
            DensityTarget::Atom(n) if n < atom_count => 1e-6,
            _ => DENSITY_THRESHOLD,
        };
        tolerances.push(Tolerance::max(format!("{label}.err_N{atom_count}"), threshold));
    }

    let mut parameters = BTreeMap::new();
    write_potential(v, &mut parameters);
    grids.write(&mut parameters);
    parameters.insert("atom_count".into(), atom_count.to_string());
    parameters.insert("targets".into(), join(targets));
    Ok(ExperimentReport::finish("density", parameters, metrics, tolerances, notes, start))
}

// ---------------------------------------------------------------------------
// round trip

/// `‖Ψ(Ψ⁻¹p) − p‖/‖p‖` for positive parts `p` of `atom(−,n)`, plus the zero
/// target.
pub fn roundtrip_study(v: &Potential, atoms: &[usize], grids: &StudyGrids) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    let eg = grids.energy();
    let rg = grids.radial(v);
    let line = grids.line()?;
    let tr = SpectralTransform::new(v, rg, eg.clone())?;
    let mut metrics = BTreeMap::new();
    let mut tolerances = Vec::new();

    let zero = SpectralFunction::zeros(eg.clone());
    let back = tr.psi_forward(&tr.psi_inverse(&zero)?)?;
    metrics.insert("zero.err".into(), back.norm());
    tolerances.push(Tolerance::max("zero.err", 0.0));

    for &n in atoms {
        let p = positive_part(&atom(Side::Minus, n, &line), &eg)?;
        let f = tr.psi_inverse(&p)?;
        let back = tr.psi_forward(&f)?;
        let err = back.distance(&p) / p.norm();
        let fnorm = f.norm();
        log::info!("roundtrip atom {n}: err {err:.3e}, ‖Ψ⁻¹p‖ = {fnorm:.6}");
        metrics.insert(format!("atom{n}.err"), err);
        metrics.insert(format!("atom{n}.inverse_norm"), fnorm);
        metrics.insert(format!("atom{n}.finite"), if f.values.iter().all(|z| z.is_finite()) { 1.0 } else { 0.0 });
        tolerances.push(Tolerance::max(format!("atom{n}.err"), ROUNDTRIP_TOL));
        tolerances.push(Tolerance::min(format!("atom{n}.finite"), 1.0));
    }

    let mut parameters = BTreeMap::new();
    write_potential(v, &mut parameters);
    grids.write(&mut parameters);
    parameters.insert("atoms".into(), join(atoms));
    Ok(ExperimentReport::finish("roundtrip", parameters, metrics, tolerances, Vec::new(), start))
}

// ---------------------------------------------------------------------------
// time asymmetry

fn time_label(t: f64) -> String {
    format!("{t:?}")
}

/// Leakage of `e^{−itE}b` out of `H²₋` for atoms `b = atom(−,n)` on the Hardy
/// line grid: the criterion metrics. The literal representer leakage of
/// `Ψ⁻¹ positive_part(b)` is recorded alongside for information only.
pub fn asymmetry_study(
    v: &Potential,
    atoms: &[usize],
    times: &[f64],
    grids: &StudyGrids,
) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    let line = grids.line()?;
    let limit = line.x_max() / 4.0;
    if let Some(&t) = times.iter().find(|t| t.abs() > limit) {
        return Err(EvolutionError::Wraparound { t: t.abs(), limit }.into());
    }
    let mut metrics = BTreeMap::new();
    let mut tolerances = Vec::new();
    for &n in atoms {
        let b = atom(Side::Minus, n, &line);
        let leaks = times.par_iter().map(|&t| hardy_leakage(&b, t)).collect::<Result<Vec<_>, _>>()?;
        for (&t, leak) in times.iter().zip(leaks) {
            let key = format!("atom{n}.leakage_t{}", time_label(t));
            metrics.insert(key.clone(), leak);
            tolerances.push(if t > 0.0 {
                Tolerance::max(key, FORWARD_LEAKAGE_TOL)
            } else if t == 0.0 {
                Tolerance::max(key, INITIAL_LEAKAGE_TOL)
            } else {
                Tolerance::min(key, BACKWARD_LEAKAGE_MIN)
            });
        }
    }

    // informational: literal F⁻¹ of the zero-extended positive part
    let eg = grids.energy();
    let tr = SpectralTransform::new(v, grids.radial(v), eg.clone())?;
    let evo = grids.evolution_line()?;
    for &n in atoms {
        let p = positive_part(&atom(Side::Minus, n, &evo), &eg)?;
        let rep = representer_of(&tr, &evo, &tr.psi_inverse(&p)?)?;
        metrics.insert(format!("atom{n}.representer_leakage"), rep.leakage);
    }

    let mut parameters = BTreeMap::new();
    write_potential(v, &mut parameters);
    grids.write(&mut parameters);
    parameters.insert("atoms".into(), join(atoms));
    parameters.insert("times".into(), times.iter().map(|&t| time_label(t)).collect::<Vec<_>>().join(","));
    Ok(ExperimentReport::finish("asymmetry", parameters, metrics, tolerances, Vec::new(), start))
}

/// Re-runs a report from its own parameter block.
pub fn rerun(report: &ExperimentReport) -> Result<ExperimentReport, ExperimentError> {
    let p = &report.parameters;
    let v = read_potential(p)?;
    let grids = StudyGrids::read(p)?;
    match report.name.as_str() {
        "density" => hardy_density_study(&v, get(p, "atom_count")?, &list::<DensityTarget>(p, "targets")?, &grids),
        "roundtrip" => roundtrip_study(&v, &list::<usize>(p, "atoms")?, &grids),
        "asymmetry" => asymmetry_study(&v, &list::<usize>(p, "atoms")?, &list::<f64>(p, "times")?, &grids),
        other => Err(ExperimentError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudyGrids {
        StudyGrids { line_n: 1 << 18, line_e_max: 8192.0, ..StudyGrids::default() }
    }

    #[test]
    fn doubling_counts_end_at_n() {
        assert_eq!(doubling_counts(1), vec![1]);
        assert_eq!(doubling_counts(64), vec![1, 2, 4, 8, 16, 32, 64]);
        assert_eq!(doubling_counts(6), vec![1, 2, 4, 6]);
    }

    #[test]
    fn target_in_span_is_recovered() {
        let v = Potential::free(1.0).unwrap();
        let r = hardy_density_study(&v, 4, &[DensityTarget::Atom(3)], &small()).unwrap();
        assert!(r.metrics["atom3.err_N4"] < 1e-6, "{:?}", r.metrics);
        assert!(r.passed);
    }

    #[test]
    fn nested_errors_never_increase() {
        let v = Potential::free(1.0).unwrap();
        let r = hardy_density_study(&v, 16, &DensityTarget::DEFAULTS, &small()).unwrap();
        for t in DensityTarget::DEFAULTS {
            assert_eq!(r.metrics[&format!("{}.max_increase", t.label())], 0.0);
        }
    }

    #[test]
    fn singular_extremes_of_a_diagonal() {
        let r = DMatrix::<C>::from_diagonal(&DVector::from_vec(vec![C::new(3.0, 0.0), C::new(0.5, 0.0), C::new(1e-3, 0.0)]));
        let (smax, smin) = singular_extremes(&r);
        assert!((smax - 3.0).abs() < 1e-10 && (smin - 1e-3).abs() < 1e-13);
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut metrics = BTreeMap::new();
        metrics.insert("x".to_string(), 0.1 + 0.2);
        let r = ExperimentReport::finish(
            "density",
            BTreeMap::new(),
            metrics,
            vec![Tolerance::max("x", 1.0), Tolerance::min("x", 0.0)],
            vec![],
            Instant::now(),
        );
        assert!(r.passed);
        assert_eq!(ExperimentReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn missing_metric_fails_its_tolerance() {
        assert!(!Tolerance::max("absent", 1.0).holds(&BTreeMap::new()));
    }

    #[test]
    fn rerun_reproduces_metrics() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let r = hardy_density_study(&v, 8, &DensityTarget::DEFAULTS, &small()).unwrap();
        let again = rerun(&r).unwrap();
        assert_eq!(again.parameters, r.parameters);
        for (k, m) in &r.metrics {
            assert!((again.metrics[k] - m).abs() <= 1e-12 * m.abs().max(1.0), "{k}");
        }
    }

    #[test]
    fn wraparound_is_rejected_before_work() {
        let v = Potential::free(1.0).unwrap();
        let grids = small();
        let t = grids.line().unwrap().x_max();
        let err = asymmetry_study(&v, &[0], &[t], &grids).unwrap_err();
        assert_eq!(err.guard(), Some("WraparoundGuard"));
    }
}
