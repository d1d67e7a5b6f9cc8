//! Regular solution of `-y'' + V y = E y` with `y(0) = 0`, `y'(0) = 1`.
//!
//! The solution is entire in `E`. Piecewise-constant potentials are propagated
//! with the exact segment transfer matrix; tabulated potentials use an
//! adaptive Dormand–Prince 5(4) integrator on the complex state `(y, y')`.
//! Beyond the support radius every kind continues with the free transfer.

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::Potential;

type C = Complex64;

pub const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("StepFailure: integrator could not meet tol={tol:e} near r={r} for E={e}")]
    StepFailure { r: f64, e: C, tol: f64 },
    #[error("invalid radial-ODE input: {0}")]
    BadInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularSolutionSample {
    pub r: f64,
    pub e: C,
    pub phi: C,
    pub dphi: C,
}

/// `cos(√z·h)` and `sin(√z·h)/√z`, both entire in `z`.
pub(crate) fn cos_sinc(z: C, h: f64) -> (C, C) {
    let x = z * (h * h);
    if x.norm() < 0.1 {
        // Even power series; 12 terms leave a remainder far below 1e-17.
        let mut c = C::new(0.0, 0.0);
        let mut s = C::new(0.0, 0.0);
        let mut term_c = C::new(1.0, 0.0);
        let mut term_s = C::new(h, 0.0);
        for n in 0..12 {
            c += term_c;
            s += term_s;
            let n = n as f64;
            term_c *= -x / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
            term_s *= -x / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        }
        (c, s)
    } else {
        let q = z.sqrt();
        let qh = q * h;
        (qh.cos(), qh.sin() / q)
    }
}

/// Propagates `(y, y')` across a constant-potential stretch of length `h`.
pub(crate) fn transfer(e: C, v: f64, h: f64, y: C, dy: C) -> (C, C) {
    let z = e - v;
    let (c, s) = cos_sinc(z, h);
    (c * y + s * dy, -z * s * y + c * dy)
}

/// `φ₀(r,E) = sin(√E r)/√E` and its r-derivative `cos(√E r)`.
pub fn free_regular(e: C, r: f64) -> (C, C) {
    let (c, s) = cos_sinc(e, r);
    (s, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact transfer for piecewise-constant kinds, Runge–Kutta otherwise.
    Auto,
    /// Always integrate inside the support with Dormand–Prince.
    RungeKutta,
}

#[derive(Debug, Clone, Copy)]
pub struct RegularSolver {
    pub tol: f64,
    pub method: Method,
    pub max_steps: usize,
    /// First trial step as a fraction of the support radius.
    pub initial_step_fraction: f64,
}

impl Default for RegularSolver {
    fn default() -> Self {
        Self::new(DEFAULT_TOL)
    }
}

impl RegularSolver {
    pub fn new(tol: f64) -> Self {
        Self { tol, method: Method::Auto, max_steps: DEFAULT_MAX_STEPS, initial_step_fraction: 1e-3 }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_initial_step_fraction(mut self, fraction: f64) -> Self {
        self.initial_step_fraction = fraction;
        self
    }

    pub fn solve_at(&self, v: &Potential, e: C, r_end: f64) -> Result<RegularSolutionSample, OdeError> {
        if !(r_end > 0.0 && r_end.is_finite()) {
            return Err(OdeError::BadInput(format!("r_end must be positive, got {r_end}")));
        }
        let out = self.solve_on(v, e, &[r_end])?;
        let (phi, dphi) = out[0];
        Ok(RegularSolutionSample { r: r_end, e, phi, dphi })
    }

    /// `(φ, φ')` at every radius in `nodes`, which must be sorted ascending
    /// and non-negative.
    pub fn solve_on(&self, v: &Potential, e: C, nodes: &[f64]) -> Result<Vec<(C, C)>, OdeError> {
        if !(self.tol > 0.0) {
            return Err(OdeError::BadInput(format!("tol must be positive, got {}", self.tol)));
        }
        if nodes.first().is_some_and(|&r| r < 0.0) || nodes.windows(2).any(|w| w[1] < w[0]) {
            return Err(OdeError::BadInput("nodes must be non-negative and sorted".into()));
        }
        if v.is_free() {
            return Ok(nodes.iter().map(|&r| free_regular(e, r)).collect());
        }
        let radius = v.radius();
        let split = nodes.partition_point(|&r| r <= radius);
        let (inner, outer) = nodes.split_at(split);
        let mut out = Vec::with_capacity(nodes.len());
        let (y_r, dy_r) = match (self.method, v.segments()) {
            (Method::Auto, Some(segs)) => {
                let mut y = C::new(0.0, 0.0);
                let mut dy = C::new(1.0, 0.0);
                let mut pos = 0.0;
                let mut next = inner.iter().peekable();
                for seg in &segs {
                    while let Some(&&r) = next.peek() {
                        if r > seg.end {
                            break;
                        }
                        let (a, b) = transfer(e, seg.value, r - pos, y, dy);
                        y = a;
                        dy = b;
                        pos = r;
                        out.push((y, dy));
                        next.next();
                    }
                    let (a, b) = transfer(e, seg.value, seg.end - pos, y, dy);
                    y = a;
                    dy = b;
                    pos = seg.end;
                }
                (y, dy)
            }
            _ => self.runge_kutta(v, e, inner, &mut out)?,
        };
        for &r in outer {
            out.push(transfer(e, 0.0, r - radius, y_r, dy_r));
        }
        Ok(out)
    }

    /// Dormand–Prince on `[0, R]`, stopping exactly at breakpoints and at
    /// each requested node. Returns the state at `R`.
    fn runge_kutta(
        &self,
        v: &Potential,
        e: C,
        inner: &[f64],
        out: &mut Vec<(C, C)>,
    ) -> Result<(C, C), OdeError> {
        let radius = v.radius();
        let h_max = radius / 64.0;
        let mut stops: Vec<f64> = v.breakpoints();
        stops.extend_from_slice(inner);
        stops.push(radius);
        stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
        stops.dedup();

        let rhs = |r: f64, y: [C; 2]| -> [C; 2] { [y[1], (v.evaluate_inside(r) - e) * y[0]] };
        let mut state = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
        let mut r = 0.0;
        let mut h = (self.initial_step_fraction * radius).min(h_max);
        let mut steps = 0usize;
        let mut node_iter = inner.iter().peekable();
        while let Some(&&r0) = node_iter.peek() {
            if r0 > 0.0 {
                break;
            }
            out.push((state[0], state[1]));
            node_iter.next();
        }
        for &stop in &stops {
            if stop <= r {
                continue;
            }
            let seg_start = r;
            while r < stop {
                steps += 1;
                if steps > self.max_steps {
                    return Err(OdeError::StepFailure { r, e, tol: self.tol });
                }
                let last = r + h >= stop;
                let hh = if last { stop - r } else { h };
                // Keep the sampling point strictly inside [seg_start, stop] so
                // kinks at the stop are never straddled.
                let f = |x: f64, y: [C; 2]| rhs(x.clamp(seg_start, stop), y);
                let (y_new, err) = dopri_step(&f, r, state, hh);
                let scale = |i: usize| self.tol * (1.0 + state[i].norm().max(y_new[i].norm()));
                let err_norm = (0..2).map(|i| err[i].norm() / scale(i)).fold(0.0, f64::max);
                if err_norm <= 1.0 || hh < 1e-14 * radius {
                    if hh < 1e-14 * radius && err_norm > 1.0 {
                        return Err(OdeError::StepFailure { r, e, tol: self.tol });
                    }
                    r = if last { stop } else { r + hh };
                    state = y_new;
                    let grow = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
                    let proposed = (hh * grow).min(h_max);
                    // A truncated final step says nothing about the next segment.
                    if !(last && hh < h) {
                        h = proposed;
                    }
                } else {
                    h = hh * (0.9 * err_norm.powf(-0.25)).clamp(0.1, 0.9);
                }
            }
            while let Some(&&node) = node_iter.peek() {
                if node > stop {
                    break;
                }
                out.push((state[0], state[1]));
                node_iter.next();
            }
        }
        Ok((state[0], state[1]))
    }
}

impl Potential {
    /// Value used inside the support by the integrator (no `r > R` test).
    fn evaluate_inside(&self, r: f64) -> f64 {
        self.evaluate(r.min(self.radius()))
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri_step<F>(f: &F, r: f64, y: [C; 2], h: f64) -> ([C; 2], [C; 2])
where
    F: Fn(f64, [C; 2]) -> [C; 2],
{
    let comb = |terms: &[(f64, &[C; 2])]| -> [C; 2] {
        let mut out = y;
        for (c, k) in terms {
            out[0] += k[0] * (h * c);
            out[1] += k[1] * (h * c);
        }
        out
    };
    let k1 = f(r, y);
    let k2 = f(r + h / 5.0, comb(&[(A21, &k1)]));
    let k3 = f(r + 3.0 * h / 10.0, comb(&[(A31, &k1), (A32, &k2)]));
    let k4 = f(r + 4.0 * h / 5.0, comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(r + 8.0 * h / 9.0, comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(r + h, comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = comb(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(r + h, y5);
    let mut err = [C::new(0.0, 0.0); 2];
    for i in 0..2 {
        err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
    }
    (y5, err)
}

/// Regular solution at `r_end` with default settings.
pub fn integrate_regular(v: &Potential, e: C, r_end: f64, tol: f64) -> Result<RegularSolutionSample, OdeError> {
    RegularSolver::new(tol).solve_at(v, e, r_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn free_examples() {
        let (phi, dphi) = free_regular(c(1.0), PI / 2.0);
        assert!((phi - 1.0).norm() < 1e-15);
        assert!(dphi.norm() < 1e-15);
        assert!((free_regular(c(0.0), 3.0).0 - 3.0).norm() < 1e-15);
        assert!((free_regular(c(4.0), PI / 4.0).0 - 0.5).norm() < 1e-15);
    }

    #[test]
    fn free_is_continuous_across_series_switch() {
        // Series branch below |E r²| = 0.1, trigonometric above.
        for e in [0.0999, 0.1001, -0.0999, -0.1001] {
            let (s, _) = free_regular(c(e), 1.0);
            let k = C::new(e, 0.0).sqrt();
            let exact = if e == 0.0 { c(1.0) } else { k.sin() / k };
            assert!((s - exact).norm() < 1e-15, "{e}");
        }
    }

    #[test]
    fn well_inside_and_beyond() {
        let v = Potential::square_well(10.0, 1.0).unwrap();
        let s = integrate_regular(&v, c(2.0), 1.0, 1e-10).unwrap();
        let kappa = 12f64.sqrt();
        assert!((s.phi - kappa.sin() / kappa).norm() < 1e-14);
        assert!((s.dphi - kappa.cos()).norm() < 1e-14);

        // Oracle: explicit two-segment propagation in real arithmetic.
        let k = 2f64.sqrt();
        let (p1, d1) = (kappa.sin() / kappa, kappa.cos());
        let (p3, d3) = (p1 * (2.0 * k).cos() + d1 * (2.0 * k).sin() / k, -p1 * k * (2.0 * k).sin() + d1 * (2.0 * k).cos());
        let s = integrate_regular(&v, c(2.0), 3.0, 1e-10).unwrap();
        assert!((s.phi - p3).norm() < 1e-10);
        assert!((s.dphi - d3).norm() < 1e-10);
    }

    #[test]
    fn runge_kutta_matches_exact_transfer() {
        let v = Potential::piecewise_constant(vec![0.7, 1.5], vec![-6.0, 3.0]).unwrap();
        let exact = RegularSolver::new(1e-10);
        let rk = RegularSolver::new(1e-11).with_method(Method::RungeKutta);
        for e in [C::new(0.5, 0.0), C::new(9.0, 0.0), C::new(3.0, -1.5)] {
            let a = exact.solve_at(&v, e, 2.0).unwrap();
            let b = rk.solve_at(&v, e, 2.0).unwrap();
            assert!((a.phi - b.phi).norm() < 1e-9 * (1.0 + a.phi.norm()), "{e}");
            assert!((a.dphi - b.dphi).norm() < 1e-9 * (1.0 + a.dphi.norm()));
        }
    }

    #[test]
    fn table_linear_potential_real_input_stays_real() {
        let v = Potential::sampled_table(vec![0.0, 0.5, 1.0, 2.0], vec![3.0, 1.0, 2.0, 0.5]).unwrap();
        let s = integrate_regular(&v, c(5.0), 2.5, 1e-10).unwrap();
        assert!(s.phi.im.abs() <= 1e-12 * s.phi.norm());
        assert!(s.dphi.im.abs() <= 1e-12 * s.dphi.norm());
    }

    #[test]
    fn different_step_sequences_agree() {
        let v = Potential::sampled_table(vec![0.0, 0.5, 1.0, 2.0], vec![3.0, -1.0, 2.0, 0.5]).unwrap();
        let tol = 1e-10;
        let a = RegularSolver::new(tol).with_initial_step_fraction(1e-4).solve_at(&v, c(7.0), 2.0).unwrap();
        let b = RegularSolver::new(tol).with_initial_step_fraction(1.0 / 70.0).solve_at(&v, c(7.0), 2.0).unwrap();
        assert!((a.phi - b.phi).norm() <= 10.0 * tol * (1.0 + a.phi.norm()));
        assert!((a.dphi - b.dphi).norm() <= 10.0 * tol * (1.0 + a.dphi.norm()));
    }

    #[test]
    fn dependence_on_energy_is_analytic() {
        // Complex-step derivative Im φ(E₀+ih)/h against a real central
        // difference: holds only if φ is holomorphic in E.
        let tables = [
            Potential::sampled_table(vec![0.0, 0.5, 1.0, 2.0], vec![3.0, -1.0, 2.0, 0.5]).unwrap(),
            Potential::square_barrier(4.0, 2.0).unwrap(),
        ];
        let solver = RegularSolver::new(1e-12);
        for v in &tables {
            for e0 in [0.7, 3.0, 12.0] {
                let r = 2.7;
                let phi = |e: C| solver.solve_at(v, e, r).unwrap().phi;
                let h = 1e-4;
                let d = 1e-3;
                let central = (phi(c(e0 + d)) - phi(c(e0 - d))) / (2.0 * d);
                let cs = phi(C::new(e0, h)).im / h;
                assert!((cs - central.re).abs() < 1e-5 * central.re.abs().max(1e-3), "{e0}");
            }
        }
    }

    #[test]
    fn nodes_must_be_sorted() {
        let v = Potential::square_well(1.0, 1.0).unwrap();
        assert!(RegularSolver::default().solve_on(&v, c(1.0), &[0.5, 0.2]).is_err());
        assert!(integrate_regular(&v, c(1.0), 0.0, 1e-10).is_err());
    }

    proptest::proptest! {
        #[test]
        fn piecewise_real_energy_gives_real_solution(depth in -30.0f64..30.0, e in 0.01f64..50.0, r in 0.01f64..10.0) {
            let v = Potential::piecewise_constant(vec![0.4, 1.1], vec![depth, -depth / 2.0]).unwrap();
            let s = integrate_regular(&v, c(e), r, 1e-10).unwrap();
            proptest::prop_assert!(s.phi.im.abs() <= 1e-12 * s.phi.norm());
        }
    }
}
