//! Three independent routes to `e^{−itH}f` and the representer map.
//!
//! - spectral: `Ψ⁻¹ e^{−itE} Ψ f`
//! - factorized: `Ψ⁻¹ P₊ F T(t) F⁻¹ P₊ Ψ f` on a [`LineGrid`]
//! - Crank–Nicolson on a uniform grid with Dirichlet walls at 0 and `box`

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::hardy::{
    embed_spectral_with_threshold, fourier_forward, fourier_inverse, halfline_projection, hardy_projection,
    positive_part, positive_part_with_threshold, shift, Domain, HardyError, LineFunction, LineGrid, Side,
};
use crate::potential::Potential;
use crate::quadrature::equispaced_interpolate;
use crate::spectral::{apply_spectral_evolution, RadialFunction, SpectralError, SpectralTransform};

type C = Complex64;

/// Mass fraction a half-line must carry for a representer to be classified.
pub const CLASSIFY_FRACTION: f64 = 0.999;
/// Mass fraction required by [`build_from_representer`].
pub const SUPPORT_FRACTION: f64 = 0.99;
/// Relative tail mass that trips the Crank–Nicolson outrun guard.
pub const OUTRUN_TAIL: f64 = 1e-6;
/// `Ψf ~ E^{1/4}` at threshold; resampling works on `Ψf/E^{1/4}`.
pub const THRESHOLD_EXPONENT: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error("WraparoundGuard: |t| = {t} exceeds x_max/4 = {limit}")]
    Wraparound { t: f64, limit: f64 },
    #[error("OutrunGuard: {0}")]
    Outrun(String),
    #[error("SupportGuard: largest half-line mass fraction {fraction:.6} < {required}")]
    Support { fraction: f64, required: f64 },
    #[error("invalid input: {0}")]
    BadInput(String),
}

impl EvolutionError {
    pub fn guard(&self) -> Option<&'static str> {
        match self {
            Self::Spectral(e) => e.guard(),
            Self::Hardy(e) => e.guard(),
            Self::Wraparound { .. } => Some("WraparoundGuard"),
            Self::Outrun(_) => Some("OutrunGuard"),
            Self::Support { .. } => Some("SupportGuard"),
            Self::BadInput(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Factorized,
    CrankNicolson,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Factorized => "factorized",
            Self::CrankNicolson => "cn",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub t: f64,
    pub method: Method,
    pub state: RadialFunction,
    /// `|‖state‖ − ‖initial‖| / ‖initial‖`; for Crank–Nicolson measured on its
    /// own grid.
    pub norm_drift: f64,
}

fn drift(initial: f64, now: f64) -> f64 {
    if initial == 0.0 {
        now
    } else {
        (now - initial).abs() / initial
    }
}

pub fn evolve_spectral(tr: &SpectralTransform, f: &RadialFunction, t: f64) -> Result<EvolutionResult, EvolutionError> {
    let g = tr.psi_forward(f)?;
    let state = tr.psi_inverse(&apply_spectral_evolution(&g, t))?;
    let norm_drift = drift(f.norm(), state.norm());
    Ok(EvolutionResult { t, method: Method::Spectral, state, norm_drift })
}

/// The displayed factorization, leg by leg: `Ψ`, embed (zero on `E < 0`),
/// `F⁻¹`, `T(t)`, `F`, cut to `E ≥ 0` and resample, `Ψ⁻¹`.
pub fn evolve_factorized(
    tr: &SpectralTransform,
    line: &Arc<LineGrid>,
    f: &RadialFunction,
    t: f64,
) -> Result<EvolutionResult, EvolutionError> {
    let limit = line.x_max() / 4.0;
    if t.abs() > limit {
        return Err(EvolutionError::Wraparound { t, limit });
    }
    let g = tr.psi_forward(f)?;
    let x = fourier_inverse(&embed_spectral_with_threshold(&g, line, THRESHOLD_EXPONENT))?;
    let h = fourier_forward(&shift(&x, t)?)?;
    let p = positive_part_with_threshold(&halfline_projection(&h, Side::Plus), tr.energy_grid(), THRESHOLD_EXPONENT)?;
    let state = tr.psi_inverse(&p)?;
    let norm_drift = drift(f.norm(), state.norm());
    Ok(EvolutionResult { t, method: Method::Factorized, state, norm_drift })
}

/// Unitary Crank–Nicolson stepping of `i∂_t f = (−∂²_r + V) f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrankNicolson {
    pub dt: f64,
    pub spacing: f64,
    /// Far wall; `None` means four times the radial grid's `r_max`.
    pub box_length: Option<f64>,
}

impl Default for CrankNicolson {
    fn default() -> Self {
        Self { dt: 1e-3, spacing: 1.0 / 256.0, box_length: None }
    }
}

struct Tridiagonal {
    /// Off-diagonal of `I + iτH` (constant), forward-eliminated diagonal.
    off: C,
    pivots: Vec<C>,
    ratios: Vec<C>,
}

impl Tridiagonal {
    fn factor(diag: &[C], off: C) -> Self {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut ratios = Vec::with_capacity(n);
        let mut prev = C::new(0.0, 0.0);
        for (i, &d) in diag.iter().enumerate() {
            let piv = if i == 0 { d } else { d - off * off / prev };
            ratios.push(if i == 0 { C::new(0.0, 0.0) } else { off / prev });
            pivots.push(piv);
            prev = piv;
        }
        Self { off, pivots, ratios }
    }

    fn solve(&self, rhs: &mut [C]) {
        for i in 1..rhs.len() {
            let r = rhs[i - 1];
            rhs[i] -= self.ratios[i] * r;
        }
        let n = rhs.len();
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            let r = rhs[i + 1];
            rhs[i] = (rhs[i] - self.off * r) / self.pivots[i];
        }
    }
}

impl CrankNicolson {
    pub fn new(dt: f64, spacing: f64, box_length: Option<f64>) -> Result<Self, EvolutionError> {
        if !(dt > 0.0 && spacing > 0.0) || box_length.is_some_and(|b| !(b > 0.0)) {
            return Err(EvolutionError::BadInput("dt, spacing and box must be positive".into()));
        }
        Ok(Self { dt, spacing, box_length })
    }

    /// Root-mean-square momentum `(∫|f'|²/∫|f|²)^{1/2}` of samples on a
    /// uniform grid with `f(0) = 0`.
    fn rms_momentum(values: &[C], h: f64) -> f64 {
        let mut grad = 0.0;
        let mut prev = C::new(0.0, 0.0);
        for v in values {
            grad += (v - prev).norm_sqr() / (h * h);
            prev = *v;
        }
        let mass: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        if mass == 0.0 {
            0.0
        } else {
            (grad / mass).sqrt()
        }
    }

    /// Snapshots at each of `times` (same sign, increasing in magnitude).
    pub fn advance_to(
        &self,
        v: &Potential,
        f: &RadialFunction,
        times: &[f64],
    ) -> Result<Vec<EvolutionResult>, EvolutionError> {
        if times.windows(2).any(|w| w[0].abs() > w[1].abs() || w[0] * w[1] < 0.0) {
            return Err(EvolutionError::BadInput("times must share a sign and grow in magnitude".into()));
        }
        let r_max = f.grid.r_max();
        let box_length = self.box_length.unwrap_or(4.0 * r_max);
        let m = (box_length / self.spacing).round() as usize;
        if m < 16 {
            return Err(EvolutionError::BadInput("Crank-Nicolson grid too coarse".into()));
        }
        let h = box_length / m as f64;
        // interior nodes r_i = i h, i = 1..m−1
        let mut psi: Vec<C> = (1..m).map(|i| f.at(i as f64 * h)).collect();
        let initial = norm_uniform(&psi, h);

        let k_bar = Self::rms_momentum(&psi, h);
        let t_end = times.last().map_or(0.0, |t| t.abs());
        if box_length < r_max + 4.0 * t_end * k_bar {
            return Err(EvolutionError::Outrun(format!(
                "box {box_length} < r_max + 4 t k = {:.3}",
                r_max + 4.0 * t_end * k_bar
            )));
        }

        let pot: Vec<f64> = (1..m)
            .map(|i| {
                let r = i as f64 * h;
                0.5 * (v.evaluate(r - 0.5 * h) + v.evaluate(r + 0.5 * h))
            })
            .collect();
        let tail_start = ((0.9 * m as f64) as usize).min(m - 2);

        let mut out = Vec::with_capacity(times.len());
        let mut now = 0.0;
        for &t in times {
            let span = t - now;
            let steps = (span.abs() / self.dt).ceil() as usize;
            if steps > 0 {
                let tau = 0.5 * span / steps as f64;
                let inv_h2 = 1.0 / (h * h);
                let off = C::new(0.0, -tau * inv_h2);
                let diag: Vec<C> = pot.iter().map(|&p| C::new(1.0, tau * (2.0 * inv_h2 + p))).collect();
                let lhs = Tridiagonal::factor(&diag, off);
                let mut rhs = vec![C::new(0.0, 0.0); psi.len()];
                for step in 0..steps {
                    // (I − iτH) ψ
                    let n = psi.len();
                    for i in 0..n {
                        let left = if i > 0 { psi[i - 1] } else { C::new(0.0, 0.0) };
                        let right = if i + 1 < n { psi[i + 1] } else { C::new(0.0, 0.0) };
                        rhs[i] = psi[i] * diag[i].conj() + off.conj() * (left + right);
                    }
                    lhs.solve(&mut rhs);
                    std::mem::swap(&mut psi, &mut rhs);
                    if step % 256 == 255 || step + 1 == steps {
                        let tail: f64 = psi[tail_start..].iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
                        if initial > 0.0 && tail > OUTRUN_TAIL * initial * initial {
                            return Err(EvolutionError::Outrun(format!(
                                "tail mass fraction {:.3e} near the far wall at t = {:.4}",
                                tail / (initial * initial),
                                now + (step + 1) as f64 * 2.0 * tau
                            )));
                        }
                    }
                }
            }
            now = t;
            let norm_drift = drift(initial, norm_uniform(&psi, h));
            let values = f
                .grid
                .nodes()
                .iter()
                .map(|&r| sample_uniform(&psi, h, r))
                .collect();
            out.push(EvolutionResult {
                t,
                method: Method::CrankNicolson,
                state: RadialFunction::new(f.grid.clone(), values),
                norm_drift,
            });
        }
        Ok(out)
    }

    pub fn evolve(&self, v: &Potential, f: &RadialFunction, t: f64) -> Result<EvolutionResult, EvolutionError> {
        Ok(self.advance_to(v, f, &[t])?.remove(0))
    }
}

fn norm_uniform(values: &[C], h: f64) -> f64 {
    (h * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// Interior samples `ψ(i h)`, `i = 1..`, plus the wall value `ψ(0) = 0`.
fn sample_uniform(interior: &[C], h: f64, r: f64) -> C {
    // Prepending the wall keeps the stencil centred near r = 0.
    thread_local! {
        static BUF: std::cell::RefCell<Vec<C>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    let i = (r / h).floor() as usize;
    let lo = i.saturating_sub(4);
    let hi = (lo + 9).min(interior.len() + 1);
    let lo = hi.saturating_sub(9);
    BUF.with(|b| {
        let mut b = b.borrow_mut();
        b.clear();
        b.extend((lo..hi).map(|j| if j == 0 { C::new(0.0, 0.0) } else { interior[j - 1] }));
        equispaced_interpolate(&b, lo as f64 * h, h, r, 0, b.len())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Outgoing,
    Incoming,
    Unclassified,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Self::Outgoing => "outgoing",
            Self::Incoming => "incoming",
            Self::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepresenterPair {
    pub f: RadialFunction,
    pub g: LineFunction,
    pub direction: Direction,
    /// `‖P₋g‖/‖g‖`.
    pub leakage: f64,
    /// Fraction of `‖g‖²` on `x ≥ 0`.
    pub plus_fraction: f64,
}

fn plus_fraction(g: &LineFunction) -> f64 {
    let total = g.norm().powi(2);
    if total == 0.0 {
        return 0.5;
    }
    halfline_projection(g, Side::Plus).norm().powi(2) / total
}

/// `g = F⁻¹(Ψf extended by zero to E < 0)`.
pub fn representer_of(
    tr: &SpectralTransform,
    line: &Arc<LineGrid>,
    f: &RadialFunction,
) -> Result<RepresenterPair, EvolutionError> {
    let g = fourier_inverse(&embed_spectral_with_threshold(&tr.psi_forward(f)?, line, THRESHOLD_EXPONENT))?;
    let plus = plus_fraction(&g);
    let direction = if plus >= CLASSIFY_FRACTION {
        Direction::Outgoing
    } else if 1.0 - plus >= CLASSIFY_FRACTION {
        Direction::Incoming
    } else {
        Direction::Unclassified
    };
    Ok(RepresenterPair { f: f.clone(), g, direction, leakage: (1.0 - plus).max(0.0).sqrt(), plus_fraction: plus })
}

/// `f = Ψ⁻¹ P₊ F g` for `g` carried by one half-line.
pub fn build_from_representer(tr: &SpectralTransform, g: &LineFunction) -> Result<RadialFunction, EvolutionError> {
    if g.domain != Domain::X {
        return Err(HardyError::DomainTag { expected: Domain::X, got: g.domain }.into());
    }
    if g.norm() > 0.0 {
        let plus = plus_fraction(g);
        let fraction = plus.max(1.0 - plus);
        if fraction < SUPPORT_FRACTION {
            return Err(EvolutionError::Support { fraction, required: SUPPORT_FRACTION });
        }
    }
    let p = positive_part(&halfline_projection(&fourier_forward(g)?, Side::Plus), tr.energy_grid())?;
    Ok(tr.psi_inverse(&p)?)
}

/// `‖Q₊(e^{−itE} h)‖ / ‖h‖`: how much of the evolved Hardy function has left
/// `H²₋`. For `h ∈ H²₋` this is the half-line leakage of its exact
/// representer `T(t) F⁻¹h`.
pub fn hardy_leakage(h: &LineFunction, t: f64) -> Result<f64, EvolutionError> {
    let n = h.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(hardy_projection(&h.evolve(t)?, Side::Plus)?.norm() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::atom;
    use crate::spectral::{EnergyGrid, RadialGrid};

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn packet(rg: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(rg.clone(), |r| {
            C::from_polar((-(r - 20.0).powi(2) / 8.0).exp(), -2.0 * r)
        })
    }

    fn setup(v: &Potential) -> (SpectralTransform, Arc<RadialGrid>) {
        let rg = Arc::new(RadialGrid::for_potential(v, 40.0, 512, 8));
        let eg = Arc::new(EnergyGrid::default());
        (SpectralTransform::new(v, rg.clone(), eg).unwrap(), rg)
    }

    #[test]
    fn zero_time_is_identity() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let (tr, rg) = setup(&v);
        let f = packet(&rg);
        let s = evolve_spectral(&tr, &f, 0.0).unwrap();
        assert!(s.state.distance(&f) < 1e-3 * f.norm());
        let cn = CrankNicolson::default().evolve(&v, &f, 0.0).unwrap();
        assert!(cn.state.distance(&f) < 1e-8 * f.norm());
    }

    #[test]
    fn thomas_solver_inverts_the_matrix() {
        let diag: Vec<C> = (0..20).map(|i| C::new(3.0 + i as f64 * 0.1, 0.5)).collect();
        let off = C::new(-0.7, 0.2);
        let x: Vec<C> = (0..20).map(|i| C::new((i as f64).sin(), 1.0 / (1.0 + i as f64))).collect();
        let mut b: Vec<C> = (0..20)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { C::new(0.0, 0.0) };
                let r = if i < 19 { x[i + 1] } else { C::new(0.0, 0.0) };
                diag[i] * x[i] + off * (l + r)
            })
            .collect();
        Tridiagonal::factor(&diag, off).solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-13);
        }
    }

    #[test]
    fn crank_nicolson_is_unitary_per_step() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let rg = Arc::new(RadialGrid::new(20.0, 128, 8));
        let f = RadialFunction::from_fn(rg, |r| C::from_polar((-(r - 8.0).powi(2)).exp(), -1.5 * r));
        let cn = CrankNicolson::new(1e-3, 1.0 / 64.0, None).unwrap();
        let res = cn.evolve(&v, &f, 0.2).unwrap();
        assert!(res.norm_drift <= 1e-10 * 200.0);
    }

    #[test]
    fn free_packet_moves_with_group_velocity() {
        // f = Ψ₀⁻¹ of a bump supported in k ∈ [1, 2]; ⟨r⟩ advances by 2k̄t.
        let v = Potential::free(1.0).unwrap();
        let rg = Arc::new(RadialGrid::new(60.0, 768, 8));
        let eg = Arc::new(EnergyGrid::new(4.0, 128, 8));
        let tr = SpectralTransform::new(&v, rg.clone(), eg.clone()).unwrap();
        let bump = |e: f64| {
            let k = e.sqrt();
            if k > 1.0 && k < 2.0 {
                // smooth compact bump, with a phase placing the packet near r = 15
                let s = (k - 1.0) * (2.0 - k);
                real((-1.0 / s).exp() * 100.0) * C::from_polar(1.0, -15.0 * k)
            } else {
                C::new(0.0, 0.0)
            }
        };
        let g = crate::spectral::SpectralFunction::from_fn(eg.clone(), bump);
        let f = tr.psi_inverse(&g).unwrap();
        let centre = |f: &RadialFunction| {
            let w = rg.weights();
            let m: f64 = f.values.iter().zip(w).map(|(v, w)| v.norm_sqr() * w).sum();
            f.values.iter().zip(w).zip(rg.nodes()).map(|((v, w), r)| v.norm_sqr() * w * r).sum::<f64>() / m
        };
        let k_bar = {
            let (mut num, mut den) = (0.0, 0.0);
            for ((&k, &w), v) in eg.momenta().iter().zip(eg.weights()).zip(&g.values) {
                num += k * w * v.norm_sqr();
                den += w * v.norm_sqr();
            }
            num / den
        };
        let t = 3.0;
        let moved = evolve_spectral(&tr, &f, t).unwrap().state;
        let shift = centre(&moved) - centre(&f);
        assert!((shift - 2.0 * k_bar * t).abs() < 0.05 * 2.0 * k_bar * t, "shift {shift} vs {}", 2.0 * k_bar * t);
    }

    #[test]
    fn crank_nicolson_matches_spectral_through_the_barrier() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let (tr, rg) = setup(&v);
        let f = packet(&rg);
        let spec = evolve_spectral(&tr, &f, 2.0).unwrap();
        let cn = CrankNicolson::default().evolve(&v, &f, 2.0).unwrap();
        assert!(cn.state.distance(&spec.state) < 1e-3 * f.norm(), "{:e}", cn.state.distance(&spec.state) / f.norm());
    }

    #[test]
    fn factorized_matches_spectral() {
        let v = Potential::square_barrier(4.0, 2.0).unwrap();
        let (tr, rg) = setup(&v);
        let line = Arc::new(LineGrid::evolution_default());
        let f = packet(&rg);
        let zero = evolve_factorized(&tr, &line, &f, 0.0).unwrap();
        let spec0 = evolve_spectral(&tr, &f, 0.0).unwrap();
        assert!(zero.state.distance(&spec0.state) < 1e-6 * f.norm(), "{:e}", zero.state.distance(&spec0.state) / f.norm());
        let fac = evolve_factorized(&tr, &line, &f, 1.0).unwrap();
        let spec = evolve_spectral(&tr, &f, 1.0).unwrap();
        assert!(fac.state.distance(&spec.state) < 1e-3 * f.norm());
        let err = evolve_factorized(&tr, &line, &f, line.x_max()).unwrap_err();
        assert_eq!(err.guard(), Some("WraparoundGuard"));
    }

    #[test]
    fn outrun_guard_trips_in_a_small_box() {
        let v = Potential::free(1.0).unwrap();
        let rg = Arc::new(RadialGrid::new(20.0, 128, 8));
        let f = RadialFunction::from_fn(rg, |r| C::from_polar((-(r - 10.0).powi(2)).exp(), 4.0 * r));
        let cn = CrankNicolson::new(1e-3, 1.0 / 64.0, Some(22.0)).unwrap();
        assert_eq!(cn.evolve(&v, &f, 2.0).unwrap_err().guard(), Some("OutrunGuard"));
    }

    #[test]
    fn representer_directions() {
        let v = Potential::free(1.0).unwrap();
        let (tr, rg) = setup(&v);
        let line = Arc::new(LineGrid::evolution_default());
        // Ψf real: the zero-extended representer is Hermitian-symmetric in
        // modulus, |g(−x)| = |g(x)|, so neither side dominates.
        let f = RadialFunction::from_fn(rg.clone(), |r| real((-(r - 5.0).powi(2)).exp()));
        let pair = representer_of(&tr, &line, &f).unwrap();
        assert_eq!(pair.direction, Direction::Unclassified);
        assert!((pair.plus_fraction - 0.5).abs() < 1e-6);

        let g = LineFunction::zeros(line.clone(), Domain::X);
        let z = build_from_representer(&tr, &g).unwrap();
        assert!(z.values.iter().all(|v| v.norm() == 0.0));

        let even = LineFunction::from_fn(line.clone(), Domain::X, |x| real((-x * x).exp()));
        assert_eq!(build_from_representer(&tr, &even).unwrap_err().guard(), Some("SupportGuard"));
    }

    #[test]
    fn representer_norm_chain() {
        // g = e^{−x}1[x≥0]: |Fg|² = 1/(2π(1+E²)), so ‖P₊Fg‖² = 1/4.
        let v = Potential::free(1.0).unwrap();
        let (tr, _) = setup(&v);
        let line = Arc::new(LineGrid::default());
        let g = LineFunction::from_fn(line.clone(), Domain::X, |x| if x > 0.0 { real((-x).exp()) } else { real(0.0) });
        let f = build_from_representer(&tr, &g).unwrap();
        assert!((f.norm() - 0.5).abs() < 1e-3 * 0.5, "{}", f.norm());
        let back = representer_of(&tr, &line, &f).unwrap();
        assert!(back.plus_fraction > 0.5);
    }

    #[test]
    fn hardy_leakage_is_time_asymmetric() {
        let line = Arc::new(LineGrid::evolution_default());
        let b = atom(Side::Minus, 2, &line);
        assert!(hardy_leakage(&b, 1.0).unwrap() < 1e-3);
        assert!(hardy_leakage(&b, -1.0).unwrap() > 1e-2);
    }
}
