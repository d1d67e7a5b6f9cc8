//! Closed-form reference values, kept apart from the numerical paths they
//! check. Nothing here integrates an ODE or evaluates a contour integral.

use std::f64::consts::PI;

use num_complex::Complex64;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Free Jost pair `A∓ = ±1/(2ik)`.
pub fn free_jost(k: C) -> (C, C) {
    (1.0 / (2.0 * I * k), -1.0 / (2.0 * I * k))
}

/// `sin κ / κ` and `cos κ`, both even in `κ`, hence functions of `κ²`.
fn sinc_cos(kappa2: C) -> (C, C) {
    let kappa = kappa2.sqrt();
    if kappa.norm() < 1e-6 {
        return (C::new(1.0, 0.0) - kappa2 / 6.0, C::new(1.0, 0.0) - kappa2 / 2.0);
    }
    (kappa.sin() / kappa, kappa.cos())
}

/// Jost pair of a square well of depth `v0` and radius `r`, `κ² = k² + v0`:
/// `A∓ = e^{∓ikR}(sin(κR)/κ ± cos(κR)/(ik))/2`.
pub fn square_well_jost(v0: f64, radius: f64, k: C) -> (C, C) {
    let kappa2 = k * k + v0;
    // φ(R) = sin(κR)/κ, φ'(R) = cos(κR)
    let (s, c) = sinc_cos(kappa2 * radius * radius);
    let phi = s * radius;
    let a_minus = (-I * k * radius).exp() * (phi + c / (I * k)) * 0.5;
    let a_plus = (I * k * radius).exp() * (phi - c / (I * k)) * 0.5;
    (a_minus, a_plus)
}

/// `k sin(κR) + iκ cos(κR)` — vanishes exactly where `A₊` of the well does
/// (`tan κR = −iκ/k`) — and its derivative in `k`.
fn well_resonance_function(v0: f64, radius: f64, k: C) -> (C, C) {
    let kappa = (k * k + v0).sqrt();
    let (s, c) = ((kappa * radius).sin(), (kappa * radius).cos());
    let f = k * s + I * kappa * c;
    // dκ/dk = k/κ
    let dkappa = k / kappa;
    let df = s + k * c * radius * dkappa + I * dkappa * (c - kappa * radius * s);
    (f, df)
}

/// Zeros of the well's `A₊` in the rectangle `re × im`, by Newton from seeds
/// along horizontal lines through the box. Roots are deduplicated at `1e-8`.
pub fn square_well_resonances(v0: f64, radius: f64, re: (f64, f64), im: (f64, f64)) -> Vec<C> {
    let mut roots: Vec<C> = Vec::new();
    let lines = 24;
    let per_line = 400;
    for a in 0..lines {
        let y = im.0 + (im.1 - im.0) * (a as f64 + 0.5) / lines as f64;
        for b in 0..=per_line {
            let x = re.0 + (re.1 - re.0) * b as f64 / per_line as f64;
            let mut k = C::new(x, y);
            let mut converged = false;
            for _ in 0..60 {
                let (f, df) = well_resonance_function(v0, radius, k);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                k -= step;
                if !k.is_finite() || k.norm() > 10.0 * (re.1.abs() + im.0.abs() + 1.0) {
                    break;
                }
                if step.norm() < 1e-15 * (1.0 + k.norm()) {
                    converged = true;
                    break;
                }
            }
            let inside = k.re >= re.0 && k.re <= re.1 && k.im >= im.0 && k.im <= im.1;
            if converged && inside && roots.iter().all(|r| (r - k).norm() > 1e-8) {
                roots.push(k);
            }
        }
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    roots
}

/// `Ψ₀[e^{−r}](E) = E^{1/4} / (√π (1 + E))`.
pub fn psi0_exponential(e: f64) -> f64 {
    e.powf(0.25) / (PI.sqrt() * (1.0 + e))
}

/// `‖Ψ₀[e^{−r}]‖²` restricted to `k ≤ k_max`:
/// `(2/π)∫₀^K k²/(1+k²)² dk = (atan K − K/(1+K²))/π`.
pub fn psi0_exponential_norm_sq(k_max: f64) -> f64 {
    (k_max.atan() - k_max / (1.0 + k_max * k_max)) / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_jost_reduces_to_free_at_zero_depth() {
        for k in [C::new(0.3, 0.0), C::new(2.0, -0.5)] {
            let (am, ap) = square_well_jost(0.0, 1.7, k);
            let (fm, fp) = free_jost(k);
            assert!((am - fm).norm() < 1e-14 * fm.norm());
            assert!((ap - fp).norm() < 1e-14 * fp.norm());
        }
    }

    #[test]
    fn scanned_roots_are_zeros_of_the_well_jost_function() {
        let roots = square_well_resonances(10.0, 1.0, (0.1, 6.0), (-2.0, -0.01));
        assert!(!roots.is_empty());
        for k in roots {
            let (_, ap) = square_well_jost(10.0, 1.0, k);
            assert!(ap.norm() < 1e-12, "{k}");
        }
    }
}
