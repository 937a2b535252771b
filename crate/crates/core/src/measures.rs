//! Finitely supported probability measures on `R^d` in canonical form.
//!
//! A [`DiscreteMeasure`] stores distinct support points sorted
//! lexicographically together with strictly positive weights. Canonical form
//! makes equality of mathematical measures coincide with structural equality,
//! which in turn makes every downstream selection (couplings, optimal plans)
//! a pure function of the measure rather than of its input ordering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest tolerated deviation of an input weight sum from 1.
///
/// Inputs read from files carry rounding; anything beyond this is treated as
/// a user error rather than silently renormalized.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Stored weight sums are kept within this distance of 1.
pub const CANONICAL_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("empty support: no atom carries positive weight")]
    EmptySupport,
    #[error("weight sum {sum} deviates from 1 by more than 1e-9; refusing to renormalize")]
    WeightSum { sum: f64 },
    #[error("non-finite coordinate or weight in input")]
    NonFiniteInput,
    #[error("negative weight {0} in input")]
    NegativeWeight(f64),
    #[error("points and weights differ in length: {points} vs {weights}")]
    LengthMismatch { points: usize, weights: usize },
    #[error("point dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("function returned a non-finite value at support point index {index}")]
    NonFiniteValue { index: usize },
}

/// A finitely supported probability measure on `R^d`.
///
/// Invariants (enforced at construction and on deserialization):
/// - all weights strictly positive, summing to 1 within `1e-12`;
/// - support points pairwise distinct (exact coordinate equality);
/// - points sorted lexicographically, so equal measures have equal
///   representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Serde surface: `{"dim": d, "points": [[...],...], "weights": [...]}`.
#[derive(Deserialize)]
struct RawMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = MeasureError;

    fn try_from(raw: RawMeasure) -> Result<Self, MeasureError> {
        let m = DiscreteMeasure::new(raw.points, raw.weights)?;
        if m.dim != raw.dim {
            return Err(MeasureError::DimensionMismatch {
                expected: raw.dim,
                got: m.dim,
            });
        }
        Ok(m)
    }
}

/// Lexicographic comparison of two coordinate vectors of equal length.
///
/// All coordinates are finite by construction, so `partial_cmp` never fails.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y).expect("finite coordinates") {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

impl DiscreteMeasure {
    /// Builds a canonical measure from raw atoms.
    ///
    /// Zero-weight atoms are dropped, duplicate points merged (weights
    /// summed), points sorted lexicographically. A weight sum further than
    /// `1e-9` from 1 is refused ([`MeasureError::WeightSum`]); within that
    /// tolerance the weights are renormalized so the stored sum is within
    /// `1e-12` of 1.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(MeasureError::DimensionMismatch { expected: 1, got: 0 });
        }
        for p in &points {
            if p.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MeasureError::NonFiniteInput);
            }
        }
        for &w in &weights {
            if !w.is_finite() {
                return Err(MeasureError::NonFiniteInput);
            }
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight(w));
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(MeasureError::EmptySupport);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MeasureError::WeightSum { sum });
        }

        // Drop zero atoms and normalize -0.0 coordinates to +0.0 so that
        // numerically equal measures share one bit pattern.
        let mut atoms: Vec<(Vec<f64>, f64)> = points
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| (p.into_iter().map(|c| c + 0.0).collect(), w))
            .collect();
        atoms.sort_by(|a, b| lex_cmp(&a.0, &b.0));

        let mut points: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if let Some(last) = points.last() {
                if last == &p {
                    *weights.last_mut().unwrap() += w;
                    continue;
                }
            }
            points.push(p);
            weights.push(w);
        }

        // Renormalize only when needed: feeding a canonical measure back in
        // must reproduce it bit-exactly.
        for _ in 0..4 {
            let s: f64 = weights.iter().sum();
            if (s - 1.0).abs() <= CANONICAL_SUM_TOL {
                break;
            }
            for w in &mut weights {
                *w /= s;
            }
        }

        Ok(DiscreteMeasure { dim, points, weights })
    }

    /// Point mass at `point`.
    pub fn dirac(point: Vec<f64>) -> Result<Self, MeasureError> {
        Self::new(vec![point], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of support atoms.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: support is nonempty
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    /// Barycenter `sum_i w_i x_i`, summed in canonical order.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (p, w) in self.atoms() {
            for (o, c) in out.iter_mut().zip(p) {
                *o += w * c;
            }
        }
        out
    }

    /// Expectation `sum_i w_i f(x_i)`, summed in canonical order.
    ///
    /// Fails with [`MeasureError::NonFiniteValue`] if `f` yields NaN or an
    /// infinity on a support point.
    pub fn expectation<F>(&self, mut f: F) -> Result<f64, MeasureError>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut acc = 0.0;
        for (i, (p, w)) in self.atoms().enumerate() {
            let v = f(p);
            if !v.is_finite() {
                return Err(MeasureError::NonFiniteValue { index: i });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Largest weight discrepancy against `other` over the union of supports
    /// (exact point matching). `None` when dimensions differ.
    pub fn linf_distance(&self, other: &DiscreteMeasure) -> Option<f64> {
        if self.dim != other.dim {
            return None;
        }
        let mut max = 0.0f64;
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let diff = if i == self.len() {
                j += 1;
                other.weights[j - 1]
            } else if j == other.len() {
                i += 1;
                self.weights[i - 1]
            } else {
                match lex_cmp(&self.points[i], &other.points[j]) {
                    std::cmp::Ordering::Less => {
                        i += 1;
                        self.weights[i - 1]
                    }
                    std::cmp::Ordering::Greater => {
                        j += 1;
                        other.weights[j - 1]
                    }
                    std::cmp::Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (self.weights[i - 1] - other.weights[j - 1]).abs()
                    }
                }
            };
            max = max.max(diff);
        }
        Some(max)
    }
}
