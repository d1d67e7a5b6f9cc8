//! Jost functions, wave matrices and resonances.
//!
//! Outside the support the regular solution is a combination of plane waves,
//! `φ(r,E) = A₋(E) e^{ikr} + A₊(E) e^{-ikr}` with `k² = E`. Matching `φ` and
//! `φ'` at `r = R` gives both coefficients. Everything here is parametrised
//! by the momentum `k`, where `A±` are single valued; resonances are zeros of
//! `k ↦ A₊(k)` with `Im k < 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::potential::Potential;
use crate::radial_ode::{OdeError, RegularSolver};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JostError {
    #[error("ZeroEnergy: matching system degenerates at |E| = {0:e}")]
    ZeroEnergy(f64),
    #[error("real energies must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid search box: {0}")]
    BadBox(String),
    #[error("ContourTooClose: |A+| = {value:e} on the contour near k = {k} (scale {scale:e})")]
    ContourTooClose { k: C, value: f64, scale: f64 },
    #[error("NoConvergence: Newton refinement failed near k = {0}")]
    NoConvergence(C),
}

impl JostError {
    /// Name of the numerical guard that fired, if any.
    pub fn guard(&self) -> Option<&'static str> {
        match self {
            Self::ZeroEnergy(_) => Some("ZeroEnergy"),
            Self::ContourTooClose { .. } => Some("ContourTooClose"),
            Self::NoConvergence(_) => Some("NoConvergence"),
            Self::Ode(OdeError::StepFailure { .. }) => Some("StepFailure"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JostPair {
    pub e: C,
    pub k: C,
    pub a_minus: C,
    pub a_plus: C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveMatrixValue {
    pub e: f64,
    pub w_plus: C,
    pub w_minus: C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub k: C,
    pub e: C,
    pub residual: f64,
    pub newton_iterations: usize,
}

/// Momentum for an energy: `k > 0` on the positive real axis, principal
/// square root elsewhere.
pub fn principal_momentum(e: C) -> C {
    e.sqrt()
}

/// Solves `φ = A₋e^{ikR} + A₊e^{-ikR}`, `φ' = ik(A₋e^{ikR} − A₊e^{-ikR})`.
/// Returns `(A₋, A₊)`.
pub fn match_jost(k: C, radius: f64, phi: C, dphi: C) -> (C, C) {
    let ratio = dphi / (I * k);
    let a_minus = (-I * k * radius).exp() * (phi + ratio) * 0.5;
    let a_plus = (I * k * radius).exp() * (phi - ratio) * 0.5;
    (a_minus, a_plus)
}

/// Closed forms for `V = 0`: `A∓ = ±1/(2ik)`.
pub fn free_jost(k: C) -> (C, C) {
    let a = 1.0 / (2.0 * I * k);
    (a, -a)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JostSolver {
    pub ode: RegularSolver,
}

impl JostSolver {
    pub fn new(ode: RegularSolver) -> Self {
        Self { ode }
    }

    /// Jost pair at momentum `k` from the matched regular solution, for every
    /// kind including the free one.
    pub fn at_momentum(&self, v: &Potential, k: C) -> Result<JostPair, JostError> {
        let e = k * k;
        if e.norm() < 1e-12 {
            return Err(JostError::ZeroEnergy(e.norm()));
        }
        let sample = self.ode.solve_at(v, e, v.radius())?;
        let (a_minus, a_plus) = match_jost(k, v.radius(), sample.phi, sample.dphi);
        Ok(JostPair { e, k, a_minus, a_plus })
    }

    pub fn jost_functions(&self, v: &Potential, e: C) -> Result<JostPair, JostError> {
        if e.norm() < 1e-12 {
            return Err(JostError::ZeroEnergy(e.norm()));
        }
        if e.im == 0.0 && e.re < 0.0 {
            return Err(JostError::NonPositiveEnergy(e.re));
        }
        let k = principal_momentum(e);
        if v.is_free() {
            let (a_minus, a_plus) = free_jost(k);
            return Ok(JostPair { e, k, a_minus, a_plus });
        }
        self.at_momentum(v, k)
    }

    pub fn wave_matrices(&self, v: &Potential, e: f64) -> Result<WaveMatrixValue, JostError> {
        let pair = self.real_pair(v, e)?;
        let norm = pair.a_plus.norm();
        Ok(WaveMatrixValue {
            e,
            w_plus: -I * pair.a_plus / norm,
            w_minus: I * pair.a_minus / norm,
        })
    }

    /// `S(E) = A₋(E)/A₊(E)`.
    pub fn s_matrix(&self, v: &Potential, e: f64) -> Result<C, JostError> {
        let pair = self.real_pair(v, e)?;
        Ok(pair.a_minus / pair.a_plus)
    }

    fn real_pair(&self, v: &Potential, e: f64) -> Result<JostPair, JostError> {
        if e.abs() < 1e-12 {
            return Err(JostError::ZeroEnergy(e.abs()));
        }
        if e <= 0.0 {
            return Err(JostError::NonPositiveEnergy(e));
        }
        self.jost_functions(v, C::new(e, 0.0))
    }
}

pub fn jost_functions(v: &Potential, e: C) -> Result<JostPair, JostError> {
    JostSolver::default().jost_functions(v, e)
}

pub fn wave_matrices(v: &Potential, e: f64) -> Result<WaveMatrixValue, JostError> {
    JostSolver::default().wave_matrices(v, e)
}

pub fn s_matrix(v: &Potential, e: f64) -> Result<C, JostError> {
    JostSolver::default().s_matrix(v, e)
}

/// Closed rectangle in the complex momentum plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self, JostError> {
        let b = Self { re_min: re.0, re_max: re.1, im_min: im.0, im_max: im.1 };
        let finite = [re.0, re.1, im.0, im.1].iter().all(|x| x.is_finite());
        if !finite || re.0 >= re.1 || im.0 >= im.1 {
            return Err(JostError::BadBox(format!("{b:?} is empty or non-finite")));
        }
        if im.1 >= 0.0 {
            return Err(JostError::BadBox(format!("Im k must stay below 0, box reaches {}", im.1)));
        }
        Ok(b)
    }

    pub fn contains(&self, k: C, slack: f64) -> bool {
        k.re >= self.re_min - slack
            && k.re <= self.re_max + slack
            && k.im >= self.im_min - slack
            && k.im <= self.im_max + slack
    }

    fn center(&self) -> C {
        C::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    /// Counter-clockwise boundary, `n` points per side, not closed.
    fn boundary(&self, n: usize) -> Vec<C> {
        let corners = [
            C::new(self.re_min, self.im_min),
            C::new(self.re_max, self.im_min),
            C::new(self.re_max, self.im_max),
            C::new(self.re_min, self.im_max),
        ];
        let mut pts = Vec::with_capacity(4 * n);
        for side in 0..4 {
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            for j in 0..n {
                pts.push(a + (b - a) * (j as f64 / n as f64));
            }
        }
        pts
    }

    fn split(&self, fx: f64, fy: f64) -> [SearchBox; 4] {
        let xm = self.re_min + fx * (self.re_max - self.re_min);
        let ym = self.im_min + fy * (self.im_max - self.im_min);
        [
            SearchBox { re_min: self.re_min, re_max: xm, im_min: self.im_min, im_max: ym },
            SearchBox { re_min: xm, re_max: self.re_max, im_min: self.im_min, im_max: ym },
            SearchBox { re_min: self.re_min, re_max: xm, im_min: ym, im_max: self.im_max },
            SearchBox { re_min: xm, re_max: self.re_max, im_min: ym, im_max: self.im_max },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceSearch {
    pub resonances: Vec<Resonance>,
    /// Argument-principle count on the outer contour.
    pub winding: i64,
    /// `max |A₊|` on the outer contour.
    pub scale: f64,
    pub nodes_per_side: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ResonanceFinder {
    pub jost: JostSolver,
    pub nodes_per_side: usize,
    pub max_nodes_per_side: usize,
    /// Zeros closer to the contour than `contour_guard * scale` are refused.
    pub contour_guard: f64,
    pub residual_tol: f64,
    pub max_newton: usize,
}

impl Default for ResonanceFinder {
    fn default() -> Self {
        Self {
            jost: JostSolver::default(),
            nodes_per_side: 512,
            max_nodes_per_side: 1 << 15,
            contour_guard: 1e-6,
            residual_tol: 1e-8,
            max_newton: 50,
        }
    }
}

struct Contour {
    winding: i64,
    scale: f64,
    min: (f64, C),
    estimate: C,
    nodes_per_side: usize,
}

impl ResonanceFinder {
    fn a_plus(&self, v: &Potential, k: C) -> Result<C, JostError> {
        Ok(self.jost.at_momentum(v, k)?.a_plus)
    }

    /// Argument principle on the box boundary, refining until the winding
    /// number is stable across one doubling and every phase increment is
    /// small.
    fn contour(&self, v: &Potential, b: &SearchBox) -> Result<Contour, JostError> {
        let mut n = self.nodes_per_side;
        let mut previous: Option<i64> = None;
        loop {
            let pts = b.boundary(n);
            let vals: Vec<C> =
                pts.par_iter().map(|&k| self.a_plus(v, k)).collect::<Result<_, _>>()?;
            let mut total = 0.0;
            let mut max_step: f64 = 0.0;
            let mut moment = C::new(0.0, 0.0);
            let m = pts.len();
            for j in 0..m {
                let (z0, z1) = (pts[j], pts[(j + 1) % m]);
                let dlog = (vals[(j + 1) % m] / vals[j]).ln();
                total += dlog.im;
                max_step = max_step.max(dlog.im.abs());
                moment += 0.5 * (z0 + z1) * dlog;
            }
            let winding = (total / (2.0 * PI)).round() as i64;
            let (min_val, min_k) = vals
                .iter()
                .zip(&pts)
                .map(|(f, &k)| (f.norm(), k))
                .fold((f64::INFINITY, C::new(0.0, 0.0)), |a, b| if b.0 < a.0 { b } else { a });
            let scale = vals.iter().map(|f| f.norm()).fold(0.0, f64::max);
            let resolved = max_step < PI / 4.0;
            if resolved && previous == Some(winding) {
                let estimate = if winding == 1 { moment / (2.0 * PI * I) } else { b.center() };
                return Ok(Contour { winding, scale, min: (min_val, min_k), estimate, nodes_per_side: n });
            }
            if n >= self.max_nodes_per_side {
                return Err(JostError::ContourTooClose { k: min_k, value: min_val, scale });
            }
            previous = resolved.then_some(winding);
            n *= 2;
        }
    }

    fn newton(&self, v: &Potential, start: C, b: &SearchBox) -> Result<(C, usize), JostError> {
        let mut k = start;
        for it in 1..=self.max_newton {
            let f = self.a_plus(v, k)?;
            let h = 1e-6 * (1.0 + k.norm());
            let df = (self.a_plus(v, k + h)? - self.a_plus(v, k - h)?) / (2.0 * h);
            if df.norm() == 0.0 || !df.is_finite() {
                break;
            }
            let step = f / df;
            k -= step;
            if !k.is_finite() || !b.contains(k, b.diameter()) {
                break;
            }
            if step.norm() <= 1e-14 * (1.0 + k.norm()) {
                return Ok((k, it));
            }
        }
        Err(JostError::NoConvergence(start))
    }

    fn search(
        &self,
        v: &Potential,
        b: &SearchBox,
        contour: Contour,
        scale: f64,
        depth: usize,
    ) -> Result<Vec<Resonance>, JostError> {
        match contour.winding {
            0 => Ok(Vec::new()),
            1 => {
                let mut attempt = self.newton(v, contour.estimate, b);
                if attempt.as_ref().map_or(true, |(k, _)| !b.contains(*k, 1e-9 * b.diameter())) {
                    attempt = self.newton(v, b.center(), b);
                }
                let (k, iterations) = attempt?;
                if !b.contains(k, 1e-9 * b.diameter()) {
                    return Err(JostError::NoConvergence(contour.estimate));
                }
                let residual = self.a_plus(v, k)?.norm();
                if residual >= self.residual_tol * scale {
                    return Err(JostError::NoConvergence(k));
                }
                Ok(vec![Resonance { k, e: k * k, residual, newton_iterations: iterations }])
            }
            w if w < 0 => Err(JostError::NoConvergence(b.center())),
            _ => {
                if depth > 40 {
                    return Err(JostError::NoConvergence(b.center()));
                }
                // Split off-centre when a zero sits on the default cut lines.
                let mut last_err = None;
                for &(fx, fy) in &[(0.5, 0.5), (0.47, 0.53), (0.54, 0.45), (0.41, 0.62)] {
                    let parts = b.split(fx, fy);
                    let contours: Result<Vec<Contour>, JostError> = parts
                        .par_iter()
                        .map(|p| {
                            let c = self.contour(v, p)?;
                            if c.min.0 < self.contour_guard * scale {
                                return Err(JostError::ContourTooClose { k: c.min.1, value: c.min.0, scale });
                            }
                            Ok(c)
                        })
                        .collect();
                    match contours {
                        Ok(cs) if cs.iter().map(|c| c.winding).sum::<i64>() == contour.winding => {
                            let found: Result<Vec<Vec<Resonance>>, JostError> = parts
                                .par_iter()
                                .zip(cs.into_par_iter())
                                .map(|(p, c)| self.search(v, p, c, scale, depth + 1))
                                .collect();
                            return Ok(found?.into_iter().flatten().collect());
                        }
                        Ok(_) => last_err = Some(JostError::NoConvergence(b.center())),
                        Err(e) => last_err = Some(e),
                    }
                }
                Err(last_err.unwrap())
            }
        }
    }

    pub fn find(&self, v: &Potential, b: &SearchBox, max_count: usize) -> Result<ResonanceSearch, JostError> {
        let contour = self.contour(v, b)?;
        let scale = contour.scale;
        if contour.min.0 < self.contour_guard * scale {
            return Err(JostError::ContourTooClose { k: contour.min.1, value: contour.min.0, scale });
        }
        let winding = contour.winding;
        let nodes_per_side = contour.nodes_per_side;
        let mut resonances = self.search(v, b, contour, scale, 0)?;
        resonances.sort_by(|a, b| a.k.re.partial_cmp(&b.k.re).unwrap());
        resonances.truncate(max_count);
        Ok(ResonanceSearch { resonances, winding, scale, nodes_per_side })
    }
}

pub fn find_resonances(v: &Potential, search_box: &SearchBox, max_count: usize) -> Result<ResonanceSearch, JostError> {
    ResonanceFinder::default().find(v, search_box, max_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn free_examples() {
        let p = jost_functions(&Potential::free(1.0).unwrap(), real(1.0)).unwrap();
        assert!((p.a_minus - C::new(0.0, -0.5)).norm() < 1e-15);
        assert!((p.a_plus - C::new(0.0, 0.5)).norm() < 1e-15);
        let p = jost_functions(&Potential::free(1.0).unwrap(), real(4.0)).unwrap();
        assert!((p.a_plus.norm() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn matcher_reproduces_free_closed_form() {
        let solver = JostSolver::default();
        for radius in [0.3, 1.0, 5.0] {
            let v = Potential::free(radius).unwrap();
            for e in [0.01, 0.7, 3.0, 100.0] {
                let k = real(e).sqrt();
                let m = solver.at_momentum(&v, k).unwrap();
                let (am, ap) = free_jost(k);
                assert!((m.a_minus - am).norm() <= 1e-12 * am.norm());
                assert!((m.a_plus - ap).norm() <= 1e-12 * ap.norm());
            }
        }
    }

    #[test]
    fn well_against_closed_form_matching() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        let p = jost_functions(&v, real(2.0)).unwrap();
        let kappa = 12f64.sqrt();
        let k = 2f64.sqrt();
        let (s, c) = (kappa.sin() / kappa, kappa.cos());
        let am = (C::new(0.0, -k)).exp() * (s + c / C::new(0.0, k)) * 0.5;
        let ap = (C::new(0.0, k)).exp() * (s - c / C::new(0.0, k)) * 0.5;
        assert!((p.a_minus - am).norm() <= 1e-9 * am.norm());
        assert!((p.a_plus - ap).norm() <= 1e-9 * ap.norm());
        assert!((p.a_plus - p.a_minus.conj()).norm() <= 1e-10 * p.a_plus.norm());
    }

    #[test]
    fn wave_matrix_and_s_examples() {
        let free = Potential::free(1.0).unwrap();
        for e in [1.0, 7.3] {
            let w = wave_matrices(&free, e).unwrap();
            assert!((w.w_plus - 1.0).norm() < 1e-15);
            assert!((w.w_minus - 1.0).norm() < 1e-15);
        }
        assert!((s_matrix(&free, 1.0).unwrap() + 1.0).norm() < 1e-15);
        let well = Potential::square_well(10.0, 1.0).unwrap();
        let w = wave_matrices(&well, 2.0).unwrap();
        assert!((w.w_plus.norm() - 1.0).abs() < 1e-10);
        // Closed-form S = A₋/A₊ at E = 400, and the S → −1 limit further out
        // (the phase shift decays like V₀R/2k).
        let (k, kappa) = (20.0f64, 410f64.sqrt());
        let (s, c) = (kappa.sin() / kappa, kappa.cos());
        let am = C::new(0.0, -k).exp() * (s + c / C::new(0.0, k)) * 0.5;
        let ap = C::new(0.0, k).exp() * (s - c / C::new(0.0, k)) * 0.5;
        assert!((s_matrix(&well, 400.0).unwrap() - am / ap).norm() < 1e-10);
        assert!((s_matrix(&well, 1e6).unwrap() + 1.0).norm() < 0.05);
    }

    #[test]
    fn zero_energy_guard() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let err = jost_functions(&v, real(1e-14)).unwrap_err();
        assert_eq!(err.guard(), Some("ZeroEnergy"));
        assert!(matches!(wave_matrices(&v, 0.0), Err(JostError::ZeroEnergy(_))));
        assert!(matches!(s_matrix(&v, -1.0), Err(JostError::NonPositiveEnergy(_))));
    }

    #[test]
    fn unimodular_on_log_grid() {
        let v = Potential::piecewise_constant(vec![0.5, 1.2, 2.0], vec![3.0, -2.0, 1.0]).unwrap();
        for i in 0..40 {
            let e = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
            let p = jost_functions(&v, real(e)).unwrap();
            assert!((p.a_plus - p.a_minus.conj()).norm() <= 1e-10 * p.a_plus.norm());
            let w = wave_matrices(&v, e).unwrap();
            assert!((w.w_plus.norm() - 1.0).abs() <= 1e-10);
            assert!((w.w_minus.norm() - 1.0).abs() <= 1e-10);
            assert!((s_matrix(&v, e).unwrap().norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn free_has_no_resonances() {
        let b = SearchBox::new((0.1, 6.0), (-2.0, -0.01)).unwrap();
        let found = find_resonances(&Potential::free(1.0).unwrap(), &b, 10).unwrap();
        assert!(found.resonances.is_empty());
        assert_eq!(found.winding, 0);
    }

    #[test]
    fn box_must_sit_below_real_axis() {
        assert!(SearchBox::new((0.1, 6.0), (-2.0, 0.5)).is_err());
        assert!(SearchBox::new((6.0, 0.1), (-2.0, -0.5)).is_err());
    }

    #[test]
    fn resonances_come_in_mirror_pairs() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let b = SearchBox::new((0.1, 6.0), (-2.0, -0.01)).unwrap();
        let found = find_resonances(&v, &b, 100).unwrap();
        assert_eq!(found.resonances.len() as i64, found.winding);
        assert!(!found.resonances.is_empty());
        let finder = ResonanceFinder::default();
        for r in &found.resonances {
            assert!(r.k.im < 0.0);
            assert!(r.residual < 1e-8 * found.scale);
            let mirror = -r.k.conj();
            assert!(finder.a_plus(&v, mirror).unwrap().norm() < 1e-8 * found.scale);
        }
    }

    #[test]
    fn table_potential_resonances_match_piecewise_equivalent() {
        // A two-sample table with equal values is the barrier itself, but
        // takes the Runge–Kutta path.
        let table = Potential::sampled_table(vec![0.0, 2.0], vec![4.0, 4.0]).unwrap();
        let barrier = Potential::square_barrier(4.0, 2.0).unwrap();
        let b = SearchBox::new((1.0, 3.0), (-1.0, -0.05)).unwrap();
        let finder = ResonanceFinder { nodes_per_side: 64, ..Default::default() };
        let a = finder.find(&barrier, &b, 10).unwrap();
        let t = finder.find(&table, &b, 10).unwrap();
        assert_eq!(a.winding, t.winding);
        for (x, y) in a.resonances.iter().zip(&t.resonances) {
            assert!((x.k - y.k).norm() < 1e-7);
        }
    }
}
