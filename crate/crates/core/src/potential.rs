//! Short-range radial potentials with compact support.
//!
//! Every potential vanishes identically beyond its support radius `R`, is real
//! and finite, and has a finite first moment `∫₀^R r|V(r)| dr`. Only the kinds
//! enumerated in [`PotentialKind`] can be constructed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("potential contains a non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("support radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("sample radii must be non-negative and strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("piecewise potential needs matching breakpoints and values: {0}")]
    Shape(String),
    #[error("failed to read potential table: {0}")]
    Io(String),
}

/// Shape of the potential. Values are the potential itself, so a well of
/// depth `V₀` stores `depth = V₀` and evaluates to `-V₀` inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Free,
    SquareWell { depth: f64 },
    SquareBarrier { height: f64 },
    /// Constant `values[i]` on `(breaks[i-1], breaks[i]]`, with `breaks[-1] = 0`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation between `(radii[i], values[i])`; constant
    /// `values[0]` below the first radius and zero beyond the last.
    SampledTable { radii: Vec<f64>, values: Vec<f64> },
}

/// A constant piece `value` on the interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    kind: PotentialKind,
    radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialValidationReport {
    pub moment_integral: f64,
    pub is_nonnegative: bool,
    pub support_radius_checked: bool,
    pub notes: Vec<String>,
}

impl Potential {
    /// `V = 0`. The radius only sets where Jost matching happens.
    pub fn free(radius: f64) -> Result<Self, PotentialError> {
        check_radius(radius)?;
        Ok(Self { kind: PotentialKind::Free, radius })
    }

    /// Attractive well, `V(r) = -depth` for `r ≤ radius`.
    pub fn square_well(depth: f64, radius: f64) -> Result<Self, PotentialError> {
        check_radius(radius)?;
        check_finite(&[depth])?;
        Ok(Self { kind: PotentialKind::SquareWell { depth }, radius })
    }

    /// Repulsive barrier, `V(r) = height` for `r ≤ radius`.
    pub fn square_barrier(height: f64, radius: f64) -> Result<Self, PotentialError> {
        check_radius(radius)?;
        check_finite(&[height])?;
        Ok(Self { kind: PotentialKind::SquareBarrier { height }, radius })
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(PotentialError::Shape(format!(
                "{} breakpoints, {} values",
                breaks.len(),
                values.len()
            )));
        }
        check_finite(&breaks)?;
        check_finite(&values)?;
        let mut prev = 0.0;
        for (index, &b) in breaks.iter().enumerate() {
            if b <= prev {
                return Err(PotentialError::NotIncreasing { index });
            }
            prev = b;
        }
        let radius = *breaks.last().unwrap();
        Ok(Self { kind: PotentialKind::PiecewiseConstant { breaks, values }, radius })
    }

    pub fn sampled_table(radii: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(PotentialError::Shape(format!(
                "{} radii, {} values (need at least two samples)",
                radii.len(),
                values.len()
            )));
        }
        check_finite(&radii)?;
        check_finite(&values)?;
        if radii[0] < 0.0 {
            return Err(PotentialError::NotIncreasing { index: 0 });
        }
        for index in 1..radii.len() {
            if radii[index] <= radii[index - 1] {
                return Err(PotentialError::NotIncreasing { index });
            }
        }
        let radius = *radii.last().unwrap();
        Ok(Self { kind: PotentialKind::SampledTable { radii, values }, radius })
    }

    /// Reads a two-column `r,V` CSV file. A non-numeric first line is
    /// treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PotentialError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, PotentialError> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(PotentialError::Io(format!(
                        "line {}: expected two columns",
                        lineno + 1
                    )))
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(r), Ok(v)) => {
                    radii.push(r);
                    values.push(v);
                }
                _ if radii.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(PotentialError::Io(format!(
                        "line {}: cannot parse `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::sampled_table(radii, values)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Support radius `R`; `V(r) = 0` for every `r > R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, PotentialKind::Free)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self.kind, PotentialKind::SampledTable { .. })
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        if r > self.radius {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::SquareWell { depth } => -depth,
            PotentialKind::SquareBarrier { height } => *height,
            PotentialKind::PiecewiseConstant { breaks, values } => {
                let i = breaks.partition_point(|&b| b < r);
                values[i.min(values.len() - 1)]
            }
            PotentialKind::SampledTable { radii, values } => {
                if r <= radii[0] {
                    return values[0];
                }
                let i = radii.partition_point(|&x| x < r);
                let (r0, r1) = (radii[i - 1], radii[i]);
                let s = (r - r0) / (r1 - r0);
                values[i - 1] + s * (values[i] - values[i - 1])
            }
        }
    }

    /// Constant pieces covering `[0, R]`, or `None` for tabulated potentials.
    pub fn segments(&self) -> Option<Vec<Segment>> {
        let r = self.radius;
        match &self.kind {
            PotentialKind::Free => Some(vec![Segment { start: 0.0, end: r, value: 0.0 }]),
            PotentialKind::SquareWell { depth } => {
                Some(vec![Segment { start: 0.0, end: r, value: -depth }])
            }
            PotentialKind::SquareBarrier { height } => {
                Some(vec![Segment { start: 0.0, end: r, value: *height }])
            }
            PotentialKind::PiecewiseConstant { breaks, values } => {
                let mut start = 0.0;
                Some(
                    breaks
                        .iter()
                        .zip(values)
                        .map(|(&end, &value)| {
                            let s = Segment { start, end, value };
                            start = end;
                            s
                        })
                        .collect(),
                )
            }
            PotentialKind::SampledTable { .. } => None,
        }
    }

    /// Radii inside `(0, R)` where `V` or its derivative jumps. Integrators
    /// must land on these exactly.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::PiecewiseConstant { breaks, .. } => {
                breaks[..breaks.len() - 1].to_vec()
            }
            PotentialKind::SampledTable { radii, .. } => {
                radii[..radii.len() - 1].iter().copied().filter(|&r| r > 0.0).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<PotentialValidationReport, PotentialError> {
        let (moment_integral, is_nonnegative) = match &self.kind {
            PotentialKind::SampledTable { radii, values } => {
                check_finite(radii)?;
                check_finite(values)?;
                let mut m = values[0].abs() * radii[0] * radii[0] / 2.0;
                for i in 1..radii.len() {
                    m += linear_moment(radii[i - 1], radii[i], values[i - 1], values[i]);
                }
                (m, values.iter().all(|&v| v >= 0.0))
            }
            _ => {
                let segs = self.segments().expect("piecewise kind");
                let m = segs
                    .iter()
                    .map(|s| s.value.abs() * (s.end * s.end - s.start * s.start) / 2.0)
                    .sum();
                (m, segs.iter().all(|s| s.value >= 0.0))
            }
        };
        // Sample beyond R: the support must be exact, not approximate.
        let support_radius_checked = (1..=64)
            .map(|i| self.radius * (1.0 + i as f64 / 16.0))
            .all(|r| self.evaluate(r) == 0.0);
        let mut notes = Vec::new();
        if is_nonnegative {
            notes.push("V >= 0: H has no eigenvalues; spectral transforms are unitary".into());
        } else {
            notes.push(
                "V takes negative values: bound states possible; only Jost and resonance \
                 results are certified"
                    .into(),
            );
        }
        Ok(PotentialValidationReport {
            moment_integral,
            is_nonnegative,
            support_radius_checked,
            notes,
        })
    }
}

fn check_radius(radius: f64) -> Result<(), PotentialError> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(PotentialError::BadRadius(radius))
    }
}

fn check_finite(xs: &[f64]) -> Result<(), PotentialError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(PotentialError::NonFinite { index }),
        None => Ok(()),
    }
}

/// `∫_{r0}^{r1} r |V(r)| dr` for `V` linear between `(r0, v0)` and `(r1, v1)`.
fn linear_moment(r0: f64, r1: f64, v0: f64, v1: f64) -> f64 {
    // Exact for a linear V of one sign: integrate r*(a + b r).
    fn signed(r0: f64, r1: f64, v0: f64, v1: f64) -> f64 {
        let b = (v1 - v0) / (r1 - r0);
        let a = v0 - b * r0;
        a * (r1 * r1 - r0 * r0) / 2.0 + b * (r1.powi(3) - r0.powi(3)) / 3.0
    }
    if v0 * v1 < 0.0 {
        let rz = r0 + (r1 - r0) * v0 / (v0 - v1);
        signed(r0, rz, v0, 0.0).abs() + signed(rz, r1, 0.0, v1).abs()
    } else {
        signed(r0, r1, v0, v1).abs()
    }
}
