//! Composite Gauss–Legendre rules on `(0, L]`.
//!
//! Panels of equal width share one set of node offsets (a "shape"), which the
//! spectral kernels exploit: `sin(y(a + o)) = sin(ya)cos(yo) + cos(ya)sin(yo)`
//! needs one `sin_cos` per panel instead of one per node.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub start: f64,
    pub width: f64,
    pub first: usize,
    pub shape: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Shape {
    width: f64,
    offsets: Vec<f64>,
    weights: Vec<f64>,
    /// Barycentric weights of the offsets.
    bary: Vec<f64>,
}

/// Composite Gauss–Legendre rule on `(0, length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule {
    length: f64,
    nodes_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    shapes: Vec<Shape>,
}

impl PanelRule {
    /// `panels` equal panels, then any panel containing a breakpoint in its
    /// interior is split there.
    pub fn new(length: f64, panels: usize, nodes_per_panel: usize, breakpoints: &[f64]) -> Self {
        assert!(length > 0.0 && panels >= 1 && nodes_per_panel >= 1);
        let (x, w) = gauss_legendre(nodes_per_panel);
        let h = length / panels as f64;
        let mut edges: Vec<f64> = (0..=panels).map(|i| i as f64 * h).collect();
        edges[panels] = length;
        for &b in breakpoints {
            if b > 0.0 && b < length && edges.iter().all(|&e| (e - b).abs() > 1e-12 * length) {
                edges.push(b);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut shapes: Vec<Shape> = Vec::new();
        let mut panels_out = Vec::with_capacity(edges.len() - 1);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let width = b - a;
            let shape = match shapes.iter().position(|s| (s.width - width).abs() <= 1e-14 * width) {
                Some(s) => s,
                None => {
                    let offsets: Vec<f64> = x.iter().map(|&t| 0.5 * width * (t + 1.0)).collect();
                    let bary = barycentric_weights(&offsets);
                    shapes.push(Shape {
                        width,
                        weights: w.iter().map(|&wi| 0.5 * width * wi).collect(),
                        offsets,
                        bary,
                    });
                    shapes.len() - 1
                }
            };
            let s = &shapes[shape];
            panels_out.push(Panel { start: a, width, first: nodes.len(), shape });
            nodes.extend(s.offsets.iter().map(|&o| a + o));
            weights.extend_from_slice(&s.weights);
        }
        Self { length, nodes_per_panel, nodes, weights, panels: panels_out, shapes }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Calls `visit(j, sin(y x_j), cos(y x_j))` for every node with index
    /// `>= from`.
    #[inline]
    pub fn for_each_trig(&self, y: f64, from: usize, mut visit: impl FnMut(usize, f64, f64)) {
        let mut shape_trig: Vec<Vec<(f64, f64)>> = Vec::with_capacity(self.shapes.len());
        let mut shape_step: Vec<(f64, f64)> = Vec::with_capacity(self.shapes.len());
        for s in &self.shapes {
            shape_trig.push(s.offsets.iter().map(|&o| (y * o).sin_cos()).collect());
            shape_step.push((y * s.width).sin_cos());
        }
        let n = self.nodes_per_panel;
        let first_panel = self.panels.partition_point(|p| p.first + n <= from);
        // panel starts advance by rotation, reseeded every RESEED panels
        const RESEED: usize = 16;
        let (mut s0, mut c0) = (0.0, 1.0);
        for (count, p) in self.panels[first_panel..].iter().enumerate() {
            if count % RESEED == 0 {
                (s0, c0) = (y * p.start).sin_cos();
            }
            let trig = &shape_trig[p.shape];
            for (i, &(so, co)) in trig.iter().enumerate() {
                let j = p.first + i;
                if j < from {
                    continue;
                }
                visit(j, s0 * co + c0 * so, c0 * co - s0 * so);
            }
            let (ss, cs) = shape_step[p.shape];
            (s0, c0) = (s0 * cs + c0 * ss, c0 * cs - s0 * ss);
        }
    }

    /// Degree `n-1` interpolation inside the panel containing `x`; zero
    /// outside `[0, length]`.
    pub fn interpolate(&self, values: &[Complex64], x: f64) -> Complex64 {
        if !(0.0..=self.length).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        let p = self.panels.partition_point(|p| p.start + p.width < x).min(self.panels.len() - 1);
        let panel = &self.panels[p];
        let shape = &self.shapes[panel.shape];
        let t = x - panel.start;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (i, (&o, &b)) in shape.offsets.iter().zip(&shape.bary).enumerate() {
            let d = t - o;
            if d == 0.0 {
                return values[panel.first + i];
            }
            let c = b / d;
            num += values[panel.first + i] * c;
            den += c;
        }
        num / den
    }
}

/// Barycentric weights of 8 equispaced nodes, `(−1)^i C(7, i)`.
const EQUI_BARY: [f64; 8] = [1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0];

/// Local 8-point interpolation of samples `values[i]` taken at `x0 + i·h`,
/// using only indices in `[lo, hi)`. Extrapolates at most one spacing below
/// `x(lo)`; zero further out or beyond `x(hi − 1)`.
pub(crate) fn equispaced_interpolate(values: &[Complex64], x0: f64, h: f64, x: f64, lo: usize, hi: usize) -> Complex64 {
    let n = EQUI_BARY.len();
    assert!(hi >= lo + n && hi <= values.len());
    let u = (x - x0) / h;
    if u < lo as f64 - 1.0 || u > (hi - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let start = (u.floor() as isize - (n as isize / 2 - 1)).clamp(lo as isize, (hi - n) as isize) as usize;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (i, &b) in EQUI_BARY.iter().enumerate() {
        let d = u - (start + i) as f64;
        if d == 0.0 {
            return values[start + i];
        }
        let c = b / d;
        num += values[start + i] * c;
        den += c;
    }
    num / den
}

pub(crate) fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let prod: f64 = (0..x.len()).filter(|&j| j != i).map(|j| x[i] - x[j]).product();
            1.0 / prod
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_weights_sum_to_length() {
        let rule = PanelRule::new(40.0, 512, 8, &[1.3]);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 40.0).abs() < 1e-10 * 40.0);
        assert_eq!(rule.len(), 513 * 8);
        assert!(rule.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(rule.nodes()[0] > 0.0 && *rule.nodes().last().unwrap() < 40.0);
    }

    #[test]
    fn trig_rotation_matches_direct() {
        let rule = PanelRule::new(10.0, 37, 8, &[2.0, 3.3]);
        for y in [0.0, 0.37, 19.9] {
            rule.for_each_trig(y, 5, |j, s, c| {
                let (ds, dc) = (y * rule.nodes()[j]).sin_cos();
                assert!(j >= 5);
                assert!((s - ds).abs() < 1e-13 && (c - dc).abs() < 1e-13);
            });
        }
    }

    #[test]
    fn interpolation_is_exact_for_low_degree() {
        let rule = PanelRule::new(3.0, 4, 8, &[]);
        let f = |x: f64| Complex64::new(x.powi(7) - 2.0 * x, x * x);
        let vals: Vec<Complex64> = rule.nodes().iter().map(|&x| f(x)).collect();
        for x in [0.0, 0.1, 0.75, 1.49, 2.999, 3.0] {
            assert!((rule.interpolate(&vals, x) - f(x)).norm() < 1e-10 * (1.0 + f(x).norm()));
        }
        assert_eq!(rule.interpolate(&vals, 3.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn equispaced_interpolation_is_exact_for_septics() {
        let f = |x: f64| Complex64::new(x.powi(7) - x, 1.0 - x * x);
        let (x0, h) = (-1.0, 0.1);
        let vals: Vec<Complex64> = (0..30).map(|i| f(x0 + i as f64 * h)).collect();
        for x in [-1.0, -0.93, 0.0, 0.555, 1.9] {
            let got = equispaced_interpolate(&vals, x0, h, x, 0, 30);
            assert!((got - f(x)).norm() < 1e-11, "x={x}");
        }
        // one-sided stencil near a cut
        let got = equispaced_interpolate(&vals, x0, h, 0.01, 10, 30);
        assert!((got - f(0.01)).norm() < 1e-11);
        assert_eq!(equispaced_interpolate(&vals, x0, h, -0.5, 10, 30), Complex64::new(0.0, 0.0));
        let below = equispaced_interpolate(&vals, x0, h, -0.05, 10, 30);
        assert!((below - f(-0.05)).norm() < 1e-10);
    }
}
