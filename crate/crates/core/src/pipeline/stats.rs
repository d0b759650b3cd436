//! Rank statistics and summary helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Both samples need at least this many values for the normal approximation.
pub const NORMAL_APPROX_MIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// pairs with `x > y`, ties counted one half
    pub u_x: f64,
    pub u_y: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

impl MannWhitney {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// `U_x` by direct pair counting.
pub fn u_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut u = 0.0;
    for a in x {
        for b in y {
            if a > b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    u
}

/// Doubled mid-ranks (integers) of the pooled sample and the tie-group sizes.
fn doubled_ranks(pooled: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0usize; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, doubled mid-rank = i + j + 2
        for &k in &order[i..=j] {
            ranks[k] = i + j + 2;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided Mann–Whitney U test.
///
/// With both samples of size at least [`NORMAL_APPROX_MIN`] the p-value uses
/// the normal approximation with tie-corrected variance and no continuity
/// correction. Otherwise it is exact: the permutation distribution of the
/// rank sum is enumerated over the observed mid-ranks, so ties are handled
/// exactly too.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<MannWhitney> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("samples must not contain NaN".into()));
    }
    let (n, m) = (x.len(), y.len());
    let u_x = u_statistic(x, y);
    let u_y = (n * m) as f64 - u_x;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = doubled_ranks(&pooled);

    let (p_value, method) = if n >= NORMAL_APPROX_MIN && m >= NORMAL_APPROX_MIN {
        let total = (n + m) as f64;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (total * (total - 1.0));
        let var = (n * m) as f64 / 12.0 * ((total + 1.0) - tie_term);
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = (u_x - (n * m) as f64 / 2.0) / var.sqrt();
            let normal = Normal::standard();
            2.0 * (1.0 - normal.cdf(z.abs()))
        };
        (p.min(1.0), PValueMethod::Normal)
    } else {
        (exact_p(&ranks, n, m), PValueMethod::Exact)
    };
    Ok(MannWhitney {
        u_x,
        u_y,
        p_value,
        method,
    })
}

/// Exact two-sided p-value of the rank sum of the smaller group.
fn exact_p(ranks: &[usize], n: usize, m: usize) -> f64 {
    // enumerate over the smaller group; its observed doubled rank sum
    let (k, observed): (usize, usize) = if n <= m {
        (n, ranks[..n].iter().sum())
    } else {
        (m, ranks[n..].iter().sum())
    };
    let max_sum: usize = {
        let mut r = ranks.to_vec();
        r.sort_unstable_by(|a, b| b.cmp(a));
        r[..k].iter().sum()
    };
    // counts[j][s]: ways to pick j of the items seen so far with doubled rank sum s
    let mut counts = vec![vec![0.0f64; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    for &r in ranks {
        for j in (1..=k).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            let (prev, cur) = (&lo[j - 1], &mut hi[0]);
            for s in (r..=max_sum).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    let dist = &counts[k];
    let total: f64 = dist.iter().sum();
    let below: f64 = dist[..=observed].iter().sum();
    let above: f64 = dist[observed..].iter().sum();
    (2.0 * below.min(above) / total).min(1.0)
}

/// Sample mean and standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}
