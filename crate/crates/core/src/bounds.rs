//! Margins, margin moments and the C-bound family.
//!
//! The margin random variable takes the value `M(x, i)` with probability
//! `P(Y = i | x)`; its first two moments give the plain C-bound
//! `1 - mu1^2 / mu2`. When training labels come from a noisy labeling
//! process described by a mislabeling matrix `p(i, j) = P(Yhat = i | Y = j)`,
//! the squared-mean term is divided by `beta` (max row sum) or `gamma`
//! (sum of column maxima) to bound the risk of the optimal classifier.
//!
//! Modeling assumption: `P(X | Y) = P(X | Y, Yhat)`, i.e. the corruption
//! depends on the true class only. It cannot be checked from data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::VoteMatrix;

/// Additive smoothing used by [`estimate_mislabeling`] in the pipeline.
pub const DEFAULT_SMOOTHING: f64 = 1.0;

const STOCHASTIC_TOL: f64 = 1e-9;

/// Column-stochastic matrix `p[i][j] = P(Yhat = i | Y = j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MislabelingMatrix {
    p: Vec<Vec<f64>>,
}

impl MislabelingMatrix {
    /// Rows are indexed by the observed class `i`, columns by the true class `j`.
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self { p };
        m.validate()?;
        Ok(m)
    }

    /// No validation; [`validate`](Self::validate) reports problems later.
    pub fn from_raw(p: Vec<Vec<f64>>) -> Self {
        Self { p }
    }

    pub fn identity(k: usize) -> Self {
        let p = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { p }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.p.len();
        if k == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        if self.p.iter().any(|r| r.len() != k) {
            return Err(Error::NotStochastic("matrix is not square".into()));
        }
        for j in 0..k {
            let mut sum = 0.0;
            for i in 0..k {
                let v = self.p[i][j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NotStochastic(format!("entry ({i},{j}) = {v}")));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("column {j} sums to {sum}")));
            }
        }
        Ok(())
    }

    pub fn class_count(&self) -> usize {
        self.p.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// `max_i sum_j p(i, j)`
    pub fn beta(&self) -> f64 {
        self.p
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_j max_i p(i, j)`
    pub fn gamma(&self) -> f64 {
        let k = self.p.len();
        (0..k)
            .map(|j| (0..k).map(|i| self.p[i][j]).fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }
}

/// First and second moments of the margin random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub sample_count: usize,
}

/// A bound value; `undefined_precondition` marks the vacuous value 1 returned
/// when the first moment is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub undefined_precondition: bool,
}

impl BoundValue {
    fn vacuous() -> Self {
        Self {
            value: 1.0,
            undefined_precondition: true,
        }
    }

    fn defined(value: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            undefined_precondition: false,
        }
    }
}

#[inline]
fn margin_unchecked(v: &[f64], y: usize) -> f64 {
    let rival = v
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != y)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if rival.is_finite() {
        v[y] - rival
    } else {
        v[y]
    }
}

/// Vote for `y` minus the largest vote for any other class.
pub fn margin(v: &[f64], y: usize) -> Result<f64> {
    if y >= v.len() {
        return Err(Error::InvalidClass {
            class: y,
            classes: v.len(),
        });
    }
    Ok(margin_unchecked(v, y))
}

/// Moments of the margin when the class of row `x` is drawn from `weights[x]`
/// and rows are equally likely.
///
/// In the selection pipeline `weights` is `votes` itself.
pub fn margin_moments(votes: &VoteMatrix, weights: &VoteMatrix) -> Result<MarginMoments> {
    if votes.rows() != weights.rows() || votes.classes() != weights.classes() {
        return Err(Error::DimensionMismatch {
            expected: votes.rows() * votes.classes(),
            actual: weights.rows() * weights.classes(),
        });
    }
    let n = votes.rows();
    if n == 0 {
        return Ok(MarginMoments {
            mu1: 0.0,
            mu2: 0.0,
            sample_count: 0,
        });
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for x in 0..n {
        let w = weights.row(x);
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL || w.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight row {x} is not a probability vector"
            )));
        }
        let v = votes.row(x);
        for (i, &p) in w.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let m = margin_unchecked(v, i);
            s1 += p * m;
            s2 += p * m * m;
        }
    }
    Ok(MarginMoments {
        mu1: s1 / n as f64,
        mu2: s2 / n as f64,
        sample_count: n,
    })
}

/// `1 - mu1^2 / mu2` when `mu1 > 0`, otherwise the flagged vacuous value 1.
pub fn cbound(m: &MarginMoments) -> BoundValue {
    corrected(m, 1.0)
}

fn corrected(m: &MarginMoments, factor: f64) -> BoundValue {
    if m.mu1 > 0.0 && m.mu2 > 0.0 {
        BoundValue::defined(1.0 - (m.mu1 * m.mu1 / m.mu2) / factor)
    } else {
        BoundValue::vacuous()
    }
}

fn check_factor(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {f}")))
    }
}

/// C-bound with the squared-mean term divided by `beta`.
pub fn cbound_beta(m: &MarginMoments, beta: f64) -> Result<BoundValue> {
    check_factor("beta", beta)?;
    Ok(corrected(m, beta))
}

/// C-bound with imperfect labels: squared-mean term divided by `gamma`.
pub fn cbound_il(m: &MarginMoments, gamma: f64) -> Result<BoundValue> {
    check_factor("gamma", gamma)?;
    Ok(corrected(m, gamma))
}

/// Estimate `p(i, j)` by comparing true labels with (out-of-bag) predictions:
/// `(count[pred = i, true = j] + alpha) / (count[true = j] + K alpha)`.
///
/// Rows whose prediction is `None` (not covered) are ignored. A class with no
/// covered example gets a uniform column.
pub fn estimate_mislabeling(
    truth: &[usize],
    predicted: &[Option<usize>],
    classes: usize,
    alpha: f64,
) -> Result<MislabelingMatrix> {
    if truth.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let mut counts = vec![vec![0.0f64; classes]; classes];
    let mut col_totals = vec![0.0f64; classes];
    for (&j, pred) in truth.iter().zip(predicted) {
        let Some(i) = *pred else { continue };
        if i >= classes || j >= classes {
            return Err(Error::InvalidClass {
                class: i.max(j),
                classes,
            });
        }
        counts[i][j] += 1.0;
        col_totals[j] += 1.0;
    }
    let uniform = 1.0 / classes as f64;
    let p = (0..classes)
        .map(|i| {
            (0..classes)
                .map(|j| {
                    let denom = col_totals[j] + classes as f64 * alpha;
                    if denom > 0.0 {
                        (counts[i][j] + alpha) / denom
                    } else {
                        uniform
                    }
                })
                .collect()
        })
        .collect();
    Ok(MislabelingMatrix { p })
}
