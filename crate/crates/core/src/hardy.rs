//! Full-line Fourier machinery: `F`, the shift `T(t)`, half-line cutoffs
//! `P±`, Hardy projections `Q± = F P∓ F⁻¹`, rational atoms and positive parts.
//!
//! The grid pairs `E_n = −E_max + nΔE` with the staggered
//! `x_j = −x_max + (j + ½)Δx`, where `Δx ΔE = 2π/N`. With that alignment
//!
//! ```text
//! e^{−iE_n x_j} = (−1)^{N/2} · i(−1)^n e^{−iπn/N} · (−1)^j · e^{−2πinj/N}
//! ```
//!
//! so `F` is one FFT between two diagonal phase factors, and is exactly
//! unitary between the `Δx`- and `ΔE`-weighted norms.
//!
//! No x node sits on the origin, so `P₊` and `P₋` are mirror images and
//! functions with a jump at `x = 0` leak symmetrically.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::quadrature::equispaced_interpolate;
use crate::spectral::{EnergyGrid, SpectralFunction};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("DomainTag: expected {expected:?}-domain input, got {got:?}")]
    DomainTag { expected: Domain, got: Domain },
    #[error("ResampleLoss: interpolated norm {interpolated:.6e} vs restricted norm {restricted:.6e}")]
    ResampleLoss { interpolated: f64, restricted: f64 },
    #[error("grid: {0}")]
    BadGrid(String),
}

impl HardyError {
    pub fn guard(&self) -> Option<&'static str> {
        match self {
            Self::DomainTag { .. } => Some("DomainTag"),
            Self::ResampleLoss { .. } => Some("ResampleLoss"),
            Self::BadGrid(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Domain {
    X,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

/// Uniform grid for `L²(ℝ)` and its Fourier dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    n: usize,
    e_max: f64,
}

impl LineGrid {
    /// `N = 2^22`, `E_max = 2^17`: `ΔE = 1/16`, `x ∈ [−50.3, 50.3)` (period 100.5).
    ///
    /// Sampled rational atoms jump at `x = 0` in the dual variable, so their
    /// band-limited Gibbs leakage across the origin is about `0.3/√E_max`;
    /// `E_max = 2^17` puts it below 1e-3.
    pub const DEFAULT_N: usize = 1 << 22;
    pub const DEFAULT_E_MAX: f64 = 131072.0;

    /// Grid for carrying spectral functions `Ψf` through the line picture:
    /// `N = 2^18`, `E_max = 512`, `ΔE = 1/256`. Low-momentum content of a
    /// packet at distance `r` varies in `E` on the scale `1/r²` near
    /// threshold, which the fine spacing resolves; the x window is ±804.
    pub fn evolution_default() -> Self {
        Self { n: 1 << 18, e_max: 512.0 }
    }

    pub fn new(n: usize, e_max: f64) -> Result<Self, HardyError> {
        if n < 2 || !n.is_power_of_two() {
            return Err(HardyError::BadGrid(format!("N = {n} must be a power of two >= 2")));
        }
        if !(e_max.is_finite() && e_max > 0.0) {
            return Err(HardyError::BadGrid(format!("E_max = {e_max} must be positive")));
        }
        Ok(Self { n, e_max })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn de(&self) -> f64 {
        2.0 * self.e_max / self.n as f64
    }

    pub fn dx(&self) -> f64 {
        PI / self.e_max
    }

    /// Half-width of the x window; the period is `2 x_max`.
    pub fn x_max(&self) -> f64 {
        0.5 * self.n as f64 * self.dx()
    }

    pub fn energy(&self, n: usize) -> f64 {
        -self.e_max + n as f64 * self.de()
    }

    pub fn position(&self, j: usize) -> f64 {
        -self.x_max() + (j as f64 + 0.5) * self.dx()
    }

    /// Index of `E = 0`, and of the first node with `x > 0`.
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    pub fn coordinates(&self, domain: Domain) -> Vec<f64> {
        match domain {
            Domain::X => (0..self.n).map(|j| self.position(j)).collect(),
            Domain::E => (0..self.n).map(|n| self.energy(n)).collect(),
        }
    }

    pub fn spacing(&self, domain: Domain) -> f64 {
        match domain {
            Domain::X => self.dx(),
            Domain::E => self.de(),
        }
    }
}

impl Default for LineGrid {
    fn default() -> Self {
        Self { n: Self::DEFAULT_N, e_max: Self::DEFAULT_E_MAX }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub grid: Arc<LineGrid>,
    pub domain: Domain,
    pub values: Vec<C>,
}

impl LineFunction {
    pub fn new(grid: Arc<LineGrid>, domain: Domain, values: Vec<C>) -> Self {
        assert_eq!(grid.len(), values.len(), "values must match the grid");
        Self { grid, domain, values }
    }

    pub fn from_fn(grid: Arc<LineGrid>, domain: Domain, f: impl Fn(f64) -> C) -> Self {
        let values = grid.coordinates(domain).into_iter().map(f).collect();
        Self { grid, domain, values }
    }

    pub fn zeros(grid: Arc<LineGrid>, domain: Domain) -> Self {
        let n = grid.len();
        Self { grid, domain, values: vec![C::new(0.0, 0.0); n] }
    }

    pub fn norm(&self) -> f64 {
        (self.grid.spacing(self.domain) * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn distance(&self, other: &LineFunction) -> f64 {
        assert_eq!(self.domain, other.domain);
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        (self.grid.spacing(self.domain) * s).sqrt()
    }

    pub fn inner(&self, other: &LineFunction) -> C {
        let s: C = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.spacing(self.domain)
    }

    pub fn scale(&self, c: C) -> Self {
        Self { grid: self.grid.clone(), domain: self.domain, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &LineFunction) -> Self {
        assert_eq!(self.domain, other.domain);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self { grid: self.grid.clone(), domain: self.domain, values }
    }

    /// Multiplication by `e^{−itE}` (E-domain only).
    pub fn evolve(&self, t: f64) -> Result<Self, HardyError> {
        expect(self, Domain::E)?;
        let grid = self.grid.clone();
        let values =
            self.values.iter().enumerate().map(|(n, v)| v * C::from_polar(1.0, -t * grid.energy(n))).collect();
        Ok(Self { grid, domain: Domain::E, values })
    }
}

fn expect(f: &LineFunction, domain: Domain) -> Result<(), HardyError> {
    if f.domain != domain {
        return Err(HardyError::DomainTag { expected: domain, got: f.domain });
    }
    Ok(())
}

fn alternating_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn dft(values: &[C], inverse: bool, scale: f64) -> Vec<C> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let global = scale * alternating_sign(n / 2);
    // E-side phase i(−1)^n e^{−iπn/N}; the x side only carries (−1)^j.
    let e_phase = |k: usize| C::from_polar(1.0, 0.5 * PI - PI * k as f64 / n as f64) * alternating_sign(k);
    let mut buf: Vec<C> = if inverse {
        values.iter().enumerate().map(|(k, v)| v * e_phase(k).conj()).collect()
    } else {
        values.iter().enumerate().map(|(j, v)| v * alternating_sign(j)).collect()
    };
    fft.process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= if inverse { C::new(global * alternating_sign(k), 0.0) } else { e_phase(k) * global };
    }
    buf
}

/// `F g(E) = (2π)^{−1/2} ∫ e^{−iEx} g(x) dx`.
pub fn fourier_forward(g: &LineFunction) -> Result<LineFunction, HardyError> {
    expect(g, Domain::X)?;
    let scale = g.grid.dx() / (2.0 * PI).sqrt();
    Ok(LineFunction { grid: g.grid.clone(), domain: Domain::E, values: dft(&g.values, false, scale) })
}

/// `F⁻¹ h(x) = (2π)^{−1/2} ∫ e^{iEx} h(E) dE`.
pub fn fourier_inverse(h: &LineFunction) -> Result<LineFunction, HardyError> {
    expect(h, Domain::E)?;
    let scale = h.grid.de() / (2.0 * PI).sqrt();
    Ok(LineFunction { grid: h.grid.clone(), domain: Domain::X, values: dft(&h.values, true, scale) })
}

/// `T(t) g(x) = g(x − t)`, realized as `F⁻¹ e^{−itE} F`.
pub fn shift(g: &LineFunction, t: f64) -> Result<LineFunction, HardyError> {
    fourier_inverse(&fourier_forward(g)?.evolve(t)?)
}

/// Multiplication by the indicator of `[0, ∞)` (`Plus`) or `(−∞, 0)`
/// (`Minus`) in the function's own variable. On the E side the node at 0
/// belongs to `Plus`; the x grid has no node there. `P₊ + P₋ = I` exactly.
pub fn halfline_projection(g: &LineFunction, side: Side) -> LineFunction {
    let origin = g.grid.origin();
    let values = g
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let keep = match side {
                Side::Plus => j >= origin,
                Side::Minus => j < origin,
            };
            if keep {
                v
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect();
    LineFunction { grid: g.grid.clone(), domain: g.domain, values }
}

/// `Q± = F P∓ F⁻¹`: projection onto the grid realization of `H²±`.
pub fn hardy_projection(h: &LineFunction, halfplane: Side) -> Result<LineFunction, HardyError> {
    let x = fourier_inverse(h)?;
    fourier_forward(&halfline_projection(&x, halfplane.opposite()))
}

/// Value of the rational atom `b_n` of `H²±`:
/// `(E+i)ⁿ/(E−i)^{n+1}/√π` for `Minus` (poles at `+i`), its conjugate for `Plus`.
pub fn atom_value(halfplane: Side, n: usize, e: f64) -> C {
    let i = C::new(0.0, 1.0);
    let z = C::new(e, 0.0);
    // Cayley factor has unit modulus on the real line; powers of it cannot overflow
    let b = ((z + i) / (z - i)).powu(n as u32) / (z - i) / PI.sqrt();
    match halfplane {
        Side::Minus => b,
        Side::Plus => b.conj(),
    }
}

pub fn atom(halfplane: Side, n: usize, grid: &Arc<LineGrid>) -> LineFunction {
    LineFunction::from_fn(grid.clone(), Domain::E, |e| atom_value(halfplane, n, e))
}

const STENCIL: usize = 8;

/// Restriction to `E > 0` resampled onto `eg`.
pub fn positive_part(h: &LineFunction, eg: &Arc<EnergyGrid>) -> Result<SpectralFunction, HardyError> {
    positive_part_with_threshold(h, eg, 0.0)
}

/// As [`positive_part`], for functions behaving like `E^γ · smooth` at
/// threshold: `h/E^γ` is interpolated and the power restored. Spectral
/// transforms `Ψf` of decaying `f` have `γ = 1/4`.
pub fn positive_part_with_threshold(
    h: &LineFunction,
    eg: &Arc<EnergyGrid>,
    gamma: f64,
) -> Result<SpectralFunction, HardyError> {
    expect(h, Domain::E)?;
    let grid = &h.grid;
    let origin = grid.origin();
    // the E = 0 sample carries no information about h/E^γ when γ > 0
    let lo = if gamma > 0.0 { origin + 1 } else { origin };
    if grid.len() - lo < STENCIL {
        return Err(HardyError::BadGrid("line grid too coarse for resampling".into()));
    }
    let scaled: Vec<C> = if gamma == 0.0 {
        h.values.clone()
    } else {
        h.values.iter().enumerate().map(|(n, v)| if n > origin { v / grid.energy(n).powf(gamma) } else { *v }).collect()
    };
    let values: Vec<C> = eg
        .energies()
        .iter()
        .map(|&e| equispaced_interpolate(&scaled, -grid.e_max(), grid.de(), e, lo, grid.len()) * e.powf(gamma))
        .collect();
    let out = SpectralFunction::new(eg.clone(), values);

    let e_top = eg.energies().last().copied().unwrap_or(0.0);
    // trapezoid: half weight on the E = 0 node
    let restricted = (grid.de()
        * (0.5 * h.values[origin].norm_sqr()
            + (origin + 1..grid.len())
                .filter(|&n| grid.energy(n) <= e_top)
                .map(|n| h.values[n].norm_sqr())
                .sum::<f64>()))
    .sqrt();
    let interpolated = out.norm();
    if (interpolated - restricted).abs() > 0.01 * restricted + 1e-12 * h.norm() {
        return Err(HardyError::ResampleLoss { interpolated, restricted });
    }
    Ok(out)
}

/// `g` on the line grid's `E ≥ 0` half, zero for `E < 0` and beyond `k_max²`.
pub fn embed_spectral(g: &SpectralFunction, grid: &Arc<LineGrid>) -> LineFunction {
    embed_spectral_with_threshold(g, grid, 0.0)
}

/// As [`embed_spectral`], interpolating `g/E^γ` in momentum.
pub fn embed_spectral_with_threshold(g: &SpectralFunction, grid: &Arc<LineGrid>, gamma: f64) -> LineFunction {
    let origin = grid.origin();
    let scaled: Vec<C> = g.values.iter().zip(g.grid.energies()).map(|(v, e)| v / e.powf(gamma)).collect();
    let rule = g.grid.rule();
    let values = (0..grid.len())
        .map(|n| {
            let e = grid.energy(n);
            if n <= origin {
                C::new(0.0, 0.0)
            } else {
                rule.interpolate(&scaled, e.sqrt()) * e.powf(gamma)
            }
        })
        .collect();
    LineFunction { grid: grid.clone(), domain: Domain::E, values }
}
