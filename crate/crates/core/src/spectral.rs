//! Unitary spectral transforms `Ψ₀`, `Ψ` and their inverses.
//!
//! ```text
//! (Ψf)(E)    = 1/(2√π E^{1/4} |A₊(E)|) ∫₀^∞ φ(r,E) f(r) dr
//! (Ψ⁻¹g)(r)  = 1/(2√π) ∫₀^∞ φ(r,E) g(E) / (E^{1/4}|A₊(E)|) dE
//! (Ψ₀f)(E)   = E^{1/4}/√π ∫₀^∞ sin(√E r)/√E f(r) dr
//! (Ψ₀⁻¹g)(r) = 1/√π ∫₀^∞ sin(√E r)/E^{1/4} g(E) dE
//! ```
//!
//! Energy integrals run over momentum (`E = k²`, `dE = 2k dk`) on a composite
//! Gauss–Legendre rule in `k`. Beyond the support radius the regular solution
//! is `α(k) sin kr + β(k) cos kr`, so only the nodes inside `R` need a table;
//! the rest of the kernel is generated on the fly.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::jost::{match_jost, JostError};
use crate::potential::Potential;
use crate::quadrature::PanelRule;
use crate::radial_ode::{OdeError, RegularSolver};

type C = Complex64;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl SpectralError {
    pub fn guard(&self) -> Option<&'static str> {
        match self {
            Self::GridMismatch(_) => Some("GridMismatch"),
            Self::Jost(e) => e.guard(),
            Self::Ode(OdeError::StepFailure { .. }) => Some("StepFailure"),
            Self::Ode(_) => None,
        }
    }
}

/// Discretisation of `L²(0, r_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    rule: PanelRule,
}

impl RadialGrid {
    pub const DEFAULT_R_MAX: f64 = 40.0;
    pub const DEFAULT_PANELS: usize = 512;
    pub const DEFAULT_NODES: usize = 8;

    pub fn new(r_max: f64, panels: usize, nodes_per_panel: usize) -> Self {
        Self::with_breakpoints(r_max, panels, nodes_per_panel, &[])
    }

    /// Panels are split at each breakpoint, e.g. the support radius, so the
    /// kink of `φ` there falls on a panel edge.
    pub fn with_breakpoints(r_max: f64, panels: usize, nodes_per_panel: usize, breakpoints: &[f64]) -> Self {
        Self { rule: PanelRule::new(r_max, panels, nodes_per_panel, breakpoints) }
    }

    pub fn for_potential(v: &Potential, r_max: f64, panels: usize, nodes_per_panel: usize) -> Self {
        let mut bps = v.breakpoints();
        bps.push(v.radius());
        Self::with_breakpoints(r_max, panels, nodes_per_panel, &bps)
    }

    pub fn r_max(&self) -> f64 {
        self.rule.length()
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn rule(&self) -> &PanelRule {
        &self.rule
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_R_MAX, Self::DEFAULT_PANELS, Self::DEFAULT_NODES)
    }
}

/// Discretisation of the spectral space `L²((0, k_max²), dE)`, built from a
/// momentum rule. `weights()` are `dE` weights, `2 k_m · (dk weight)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    rule: PanelRule,
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl EnergyGrid {
    pub const DEFAULT_K_MAX: f64 = 20.0;
    pub const DEFAULT_PANELS: usize = 256;
    pub const DEFAULT_NODES: usize = 8;

    pub fn new(k_max: f64, panels: usize, nodes_per_panel: usize) -> Self {
        let rule = PanelRule::new(k_max, panels, nodes_per_panel, &[]);
        let energies = rule.nodes().iter().map(|k| k * k).collect();
        let weights = rule.nodes().iter().zip(rule.weights()).map(|(k, w)| 2.0 * k * w).collect();
        Self { rule, energies, weights }
    }

    pub fn k_max(&self) -> f64 {
        self.rule.length()
    }

    pub fn momenta(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn rule(&self) -> &PanelRule {
        &self.rule
    }
}

impl Default for EnergyGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_K_MAX, Self::DEFAULT_PANELS, Self::DEFAULT_NODES)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<C>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<C>) -> Self {
        assert_eq!(grid.len(), values.len(), "values must match the grid");
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> C) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C::new(0.0, 0.0); n] }
    }

    pub fn norm(&self) -> f64 {
        weighted_norm(self.grid.weights(), &self.values)
    }

    pub fn distance(&self, other: &RadialFunction) -> f64 {
        weighted_distance(self.grid.weights(), &self.values, &other.values)
    }

    /// Value at any `r` by panel-local interpolation; zero beyond `r_max`.
    pub fn at(&self, r: f64) -> C {
        self.grid.rule().interpolate(&self.values, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub grid: Arc<EnergyGrid>,
    pub values: Vec<C>,
}

impl SpectralFunction {
    pub fn new(grid: Arc<EnergyGrid>, values: Vec<C>) -> Self {
        assert_eq!(grid.len(), values.len(), "values must match the grid");
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<EnergyGrid>, g: impl Fn(f64) -> C) -> Self {
        let values = grid.energies().iter().map(|&e| g(e)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<EnergyGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C::new(0.0, 0.0); n] }
    }

    pub fn norm(&self) -> f64 {
        weighted_norm(self.grid.weights(), &self.values)
    }

    pub fn distance(&self, other: &SpectralFunction) -> f64 {
        weighted_distance(self.grid.weights(), &self.values, &other.values)
    }

    pub fn inner(&self, other: &SpectralFunction) -> C {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| a.conj() * b * w)
            .sum()
    }

    /// Value at energy `e` by interpolation in momentum; zero outside
    /// `(0, k_max²]`.
    pub fn at(&self, e: f64) -> C {
        if e <= 0.0 {
            return C::new(0.0, 0.0);
        }
        self.grid.rule().interpolate(&self.values, e.sqrt())
    }
}

fn weighted_norm(w: &[f64], v: &[C]) -> f64 {
    w.iter().zip(v).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt()
}

fn weighted_distance(w: &[f64], a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    w.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * (a - b).norm_sqr()).sum::<f64>().sqrt()
}

fn warn_if_not_decayed(values: &[C], threshold: f64, what: &str) {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let tail = values.iter().rev().take(8).map(|v| v.norm()).fold(0.0, f64::max);
    if tail > threshold * max {
        log::warn!("{what} has not decayed at the grid edge: {:.3e} of its maximum", tail / max);
    }
}

fn check_grid(n: usize, what: &str) -> Result<(), SpectralError> {
    if n < 2 {
        return Err(SpectralError::GridMismatch(format!("{what} grid has {n} nodes, need at least 2")));
    }
    Ok(())
}

/// `Ψ₀` by direct quadrature of `sin(kr)`.
pub fn psi0_forward(f: &RadialFunction, eg: &Arc<EnergyGrid>) -> Result<SpectralFunction, SpectralError> {
    check_grid(f.grid.len(), "radial")?;
    warn_if_not_decayed(&f.values, 1e-8, "radial function");
    let wf: Vec<C> = f.grid.weights().iter().zip(&f.values).map(|(w, v)| v * w).collect();
    let nodes = f.grid.nodes();
    let values = eg
        .momenta()
        .par_iter()
        .map(|&k| {
            let s: C = nodes.iter().zip(&wf).map(|(&r, v)| v * (k * r).sin()).sum();
            s / (SQRT_PI * k.sqrt())
        })
        .collect();
    Ok(SpectralFunction { grid: eg.clone(), values })
}

/// `Ψ₀⁻¹` by direct quadrature.
pub fn psi0_inverse(g: &SpectralFunction, rg: &Arc<RadialGrid>) -> Result<RadialFunction, SpectralError> {
    check_grid(g.grid.len(), "energy")?;
    warn_if_not_decayed(&g.values, 1e-6, "spectral function");
    // dE/E^{1/4} = 2 k^{1/2} dk
    let coef: Vec<C> = g
        .grid
        .momenta()
        .iter()
        .zip(g.grid.rule().weights())
        .zip(&g.values)
        .map(|((&k, &w), v)| v * (2.0 * k.sqrt() * w / SQRT_PI))
        .collect();
    let ks = g.grid.momenta();
    let values = rg
        .nodes()
        .par_iter()
        .map(|&r| ks.iter().zip(&coef).map(|(&k, c)| c * (k * r).sin()).sum())
        .collect();
    Ok(RadialFunction { grid: rg.clone(), values })
}

/// Multiplication by `e^{-itE}`.
pub fn apply_spectral_evolution(g: &SpectralFunction, t: f64) -> SpectralFunction {
    let values = g
        .grid
        .energies()
        .iter()
        .zip(&g.values)
        .map(|(&e, v)| v * C::from_polar(1.0, -t * e))
        .collect();
    SpectralFunction { grid: g.grid.clone(), values }
}

/// Cached kernel of `Ψ` for one `(V, RadialGrid, EnergyGrid)` triple.
///
/// Memory: `2·n_E` exterior coefficients plus an `n_E × n_inner` table, where
/// `n_inner` counts radial nodes inside the support.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    potential: Potential,
    rgrid: Arc<RadialGrid>,
    egrid: Arc<EnergyGrid>,
    /// Index of the first radial node at or beyond `R`.
    n_inner: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `1/(2√π E^{1/4} |A₊(E)|)` per energy node.
    prefactor: Vec<f64>,
    a_plus: Vec<C>,
    /// Row-major `[m][j]`, `j < n_inner`.
    inner: Vec<f64>,
}

impl SpectralTransform {
    pub fn new(v: &Potential, rgrid: Arc<RadialGrid>, egrid: Arc<EnergyGrid>) -> Result<Self, SpectralError> {
        Self::with_solver(v, rgrid, egrid, RegularSolver::default())
    }

    pub fn with_solver(
        v: &Potential,
        rgrid: Arc<RadialGrid>,
        egrid: Arc<EnergyGrid>,
        solver: RegularSolver,
    ) -> Result<Self, SpectralError> {
        check_grid(rgrid.len(), "radial")?;
        check_grid(egrid.len(), "energy")?;
        let radius = v.radius();
        let n_inner = rgrid.nodes().partition_point(|&r| r < radius);
        let mut inner_nodes = rgrid.nodes()[..n_inner].to_vec();
        inner_nodes.push(radius);

        struct Column {
            alpha: f64,
            beta: f64,
            prefactor: f64,
            a_plus: C,
            inner: Vec<f64>,
        }
        let columns: Result<Vec<Column>, SpectralError> = egrid
            .momenta()
            .par_iter()
            .map(|&k| {
                let e = C::new(k * k, 0.0);
                let sol = solver.solve_on(v, e, &inner_nodes)?;
                let (phi, dphi) = sol[n_inner];
                let (_, a_plus) = match_jost(C::new(k, 0.0), radius, phi, dphi);
                let (s, c) = (k * radius).sin_cos();
                let (phi, dphi) = (phi.re, dphi.re);
                Ok(Column {
                    alpha: phi * s + dphi * c / k,
                    beta: phi * c - dphi * s / k,
                    prefactor: 1.0 / (2.0 * SQRT_PI * k.sqrt() * a_plus.norm()),
                    a_plus,
                    inner: sol[..n_inner].iter().map(|p| p.0.re).collect(),
                })
            })
            .collect();
        let columns = columns?;
        let mut inner = Vec::with_capacity(n_inner * columns.len());
        for c in &columns {
            inner.extend_from_slice(&c.inner);
        }
        Ok(Self {
            potential: v.clone(),
            n_inner,
            alpha: columns.iter().map(|c| c.alpha).collect(),
            beta: columns.iter().map(|c| c.beta).collect(),
            prefactor: columns.iter().map(|c| c.prefactor).collect(),
            a_plus: columns.iter().map(|c| c.a_plus).collect(),
            inner,
            rgrid,
            egrid,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn radial_grid(&self) -> &Arc<RadialGrid> {
        &self.rgrid
    }

    pub fn energy_grid(&self) -> &Arc<EnergyGrid> {
        &self.egrid
    }

    /// `A₊` at each energy node.
    pub fn a_plus(&self) -> &[C] {
        &self.a_plus
    }

    pub fn psi_forward(&self, f: &RadialFunction) -> Result<SpectralFunction, SpectralError> {
        if !Arc::ptr_eq(&f.grid, &self.rgrid) && *f.grid != *self.rgrid {
            return Err(SpectralError::GridMismatch("radial function is not on the transform's grid".into()));
        }
        warn_if_not_decayed(&f.values, 1e-8, "radial function");
        let wf: Vec<C> = self.rgrid.weights().iter().zip(&f.values).map(|(w, v)| v * w).collect();
        let n_inner = self.n_inner;
        let rule = self.rgrid.rule();
        let values = (0..self.egrid.len())
            .into_par_iter()
            .map(|m| {
                let k = self.egrid.momenta()[m];
                let mut sin_sum = C::new(0.0, 0.0);
                let mut cos_sum = C::new(0.0, 0.0);
                rule.for_each_trig(k, n_inner, |j, s, c| {
                    sin_sum += wf[j] * s;
                    cos_sum += wf[j] * c;
                });
                let row = &self.inner[m * n_inner..(m + 1) * n_inner];
                let inner: C = row.iter().zip(&wf).map(|(p, v)| v * p).sum();
                (inner + sin_sum * self.alpha[m] + cos_sum * self.beta[m]) * self.prefactor[m]
            })
            .collect();
        Ok(SpectralFunction { grid: self.egrid.clone(), values })
    }

    pub fn psi_inverse(&self, g: &SpectralFunction) -> Result<RadialFunction, SpectralError> {
        if !Arc::ptr_eq(&g.grid, &self.egrid) && *g.grid != *self.egrid {
            return Err(SpectralError::GridMismatch("spectral function is not on the transform's grid".into()));
        }
        warn_if_not_decayed(&g.values, 1e-6, "spectral function");
        let coef: Vec<C> = g
            .values
            .iter()
            .zip(self.egrid.weights())
            .zip(&self.prefactor)
            .map(|((v, u), p)| v * (u * p))
            .collect();
        let ca: Vec<C> = coef.iter().zip(&self.alpha).map(|(c, a)| c * a).collect();
        let cb: Vec<C> = coef.iter().zip(&self.beta).map(|(c, b)| c * b).collect();
        let n_inner = self.n_inner;
        let rule = self.egrid.rule();
        let values = self
            .rgrid
            .nodes()
            .par_iter()
            .enumerate()
            .map(|(j, &r)| {
                if j < n_inner {
                    coef.iter().enumerate().map(|(m, c)| c * self.inner[m * n_inner + j]).sum()
                } else {
                    let mut acc = C::new(0.0, 0.0);
                    rule.for_each_trig(r, 0, |m, s, c| {
                        acc += ca[m] * s + cb[m] * c;
                    });
                    acc
                }
            })
            .collect();
        Ok(RadialFunction { grid: self.rgrid.clone(), values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn grids() -> (Arc<RadialGrid>, Arc<EnergyGrid>) {
        (Arc::new(RadialGrid::default()), Arc::new(EnergyGrid::default()))
    }

    fn gaussian(c: f64, w: f64) -> impl Fn(f64) -> C {
        move |r| real((-(r - c).powi(2) / (2.0 * w * w)).exp())
    }

    #[test]
    fn grid_invariants() {
        let (rg, eg) = grids();
        assert!((rg.weights().iter().sum::<f64>() - 40.0).abs() < 1e-10 * 40.0);
        assert!(rg.weights().iter().all(|&w| w > 0.0));
        assert!(eg.energies().iter().all(|&e| e > 0.0));
        assert!(eg.weights().iter().all(|&w| w > 0.0));
        // ∫₀^{400} dE
        assert!((eg.weights().iter().sum::<f64>() - 400.0).abs() < 1e-9);
    }

    #[test]
    fn psi0_of_exponential_pointwise() {
        let (rg, eg) = grids();
        let f = RadialFunction::from_fn(rg, |r| real((-r).exp()));
        let g = psi0_forward(&f, &eg).unwrap();
        for (&e, v) in eg.energies().iter().zip(&g.values) {
            let exact = e.powf(0.25) / (SQRT_PI * (1.0 + e));
            assert!((v - exact).norm() < 1e-6, "E={e}");
        }
        assert!((g.at(1.0) - 1.0 / (2.0 * SQRT_PI)).norm() < 1e-6);
    }

    #[test]
    fn psi0_norm_of_exponential_matches_truncated_parseval() {
        // ‖g‖² over k ≤ K is (2/π)∫₀^K k²/(1+k²)² dk
        //   = (1/π)(atan K − K/(1+K²)), not the full 1/2.
        let (rg, eg) = grids();
        let f = RadialFunction::from_fn(rg, |r| real((-r).exp()));
        let g = psi0_forward(&f, &eg).unwrap();
        let k = eg.k_max();
        let expected = ((k.atan() - k / (1.0 + k * k)) / PI).sqrt();
        assert!((g.norm() - expected).abs() < 1e-8);
        assert!((f.norm() - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn zero_maps_to_zero() {
        let (rg, eg) = grids();
        let g = psi0_forward(&RadialFunction::zeros(rg.clone()), &eg).unwrap();
        assert!(g.values.iter().all(|v| v.norm() == 0.0));
        let f = psi0_inverse(&SpectralFunction::zeros(eg.clone()), &rg).unwrap();
        assert!(f.values.iter().all(|v| v.norm() == 0.0));
        let t = SpectralTransform::new(&Potential::square_barrier(4.0, 2.0).unwrap(), rg.clone(), eg).unwrap();
        let g = t.psi_forward(&RadialFunction::zeros(rg)).unwrap();
        assert!(g.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn psi0_round_trip_gaussian() {
        let (rg, eg) = grids();
        let f = RadialFunction::from_fn(rg.clone(), |r| real((-(r - 5.0).powi(2)).exp()));
        let back = psi0_inverse(&psi0_forward(&f, &eg).unwrap(), &rg).unwrap();
        assert!(back.distance(&f) < 1e-4 * f.norm());
    }

    #[test]
    fn free_transform_reduces_to_psi0() {
        let (rg, eg) = grids();
        let t = SpectralTransform::new(&Potential::free(1.0).unwrap(), rg.clone(), eg.clone()).unwrap();
        let f = RadialFunction::from_fn(rg.clone(), gaussian(3.0, 0.5));
        let a = t.psi_forward(&f).unwrap();
        let b = psi0_forward(&f, &eg).unwrap();
        let scale = b.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-10 * scale);
        }
        let fa = t.psi_inverse(&b).unwrap();
        let fb = psi0_inverse(&b, &rg).unwrap();
        let scale = fb.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in fa.values.iter().zip(&fb.values) {
            assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn barrier_transform_is_unitary_and_invertible() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let rg = Arc::new(RadialGrid::for_potential(&v, 40.0, 512, 8));
        let eg = Arc::new(EnergyGrid::default());
        let t = SpectralTransform::new(&v, rg.clone(), eg).unwrap();
        let f = RadialFunction::from_fn(rg, |r| real((-(r - 5.0).powi(2)).exp()));
        let g = t.psi_forward(&f).unwrap();
        assert!((g.norm() - f.norm()).abs() < 1e-3 * f.norm());
        let back = t.psi_inverse(&g).unwrap();
        assert!(back.distance(&f) < 1e-3 * f.norm());
    }

    #[test]
    fn table_potential_transform_matches_piecewise() {
        let table = Potential::sampled_table(vec![0.0, 2.0], vec![4.0, 4.0]).unwrap();
        let barrier = Potential::square_barrier(4.0, 2.0).unwrap();
        let rg = Arc::new(RadialGrid::for_potential(&barrier, 20.0, 128, 8));
        let eg = Arc::new(EnergyGrid::new(10.0, 64, 8));
        let a = SpectralTransform::new(&barrier, rg.clone(), eg.clone()).unwrap();
        let b = SpectralTransform::new(&table, rg.clone(), eg).unwrap();
        let f = RadialFunction::from_fn(rg, gaussian(6.0, 1.0));
        let (ga, gb) = (a.psi_forward(&f).unwrap(), b.psi_forward(&f).unwrap());
        assert!(ga.distance(&gb) < 1e-8 * ga.norm());
    }

    #[test]
    fn evolution_phase_is_unimodular() {
        let (_, eg) = grids();
        let g = SpectralFunction::from_fn(eg, |e| C::new((-e).exp(), e.sin()));
        assert_eq!(apply_spectral_evolution(&g, 0.0), g);
        let h = apply_spectral_evolution(&g, 3.7);
        for (a, b) in g.values.iter().zip(&h.values) {
            assert!((a.norm() - b.norm()).abs() <= 1e-15 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let (rg, eg) = grids();
        let t = SpectralTransform::new(&Potential::free(1.0).unwrap(), rg, eg).unwrap();
        let other = Arc::new(RadialGrid::new(10.0, 16, 8));
        let err = t.psi_forward(&RadialFunction::zeros(other)).unwrap_err();
        assert_eq!(err.guard(), Some("GridMismatch"));
        let tiny = Arc::new(EnergyGrid::new(1.0, 1, 1));
        assert!(psi0_inverse(&SpectralFunction::zeros(tiny), &Arc::new(RadialGrid::default())).is_err());
    }
}
