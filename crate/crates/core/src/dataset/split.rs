use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Partition, PartitionedDataset};
use crate::error::{Error, Result};
use crate::seed;

/// Fractions of rows assigned to the labeled, unlabeled and test partitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub labeled: f64,
    pub unlabeled: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(labeled: f64, unlabeled: f64, test: f64) -> Result<Self> {
        let r = Self {
            labeled,
            unlabeled,
            test,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.labeled, self.unlabeled, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidSplit("fractions must be non-negative".into()));
        }
        if self.labeled <= 0.0 {
            return Err(Error::InvalidSplit("labeled fraction must be positive".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit("fractions must sum to 1".into()));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.labeled, self.unlabeled, self.test]
    }
}

/// Apportion `n` into three counts proportional to `ratios` (largest remainder),
/// then make every positive-ratio slot non-empty by taking from the largest.
fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = e.floor() as usize;
    }
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &slot in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[slot] > 0.0 {
            counts[slot] += 1;
            left -= 1;
        }
    }
    for slot in 0..3 {
        if ratios[slot] > 0.0 && counts[slot] == 0 {
            let donor = (0..3).max_by_key(|&s| (counts[s], 3 - s)).unwrap();
            if counts[donor] > 1 {
                counts[donor] -= 1;
                counts[slot] += 1;
            }
        }
    }
    counts
}

/// Stratified random split. Every class with at least one example gets at least
/// one row in every partition whose fraction is positive.
pub fn split(ds: &PartitionedDataset, ratios: SplitRatios, seed: u64) -> Result<PartitionedDataset> {
    ratios.validate()?;
    let required = ratios.as_array().iter().filter(|&&r| r > 0.0).count();
    let mut rng = seed::rng(seed);
    let mut partition = vec![Partition::Unlabeled; ds.len()];

    for class in 0..ds.class_count() {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| ds.truth()[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < required {
            return Err(Error::InvalidSplit(format!(
                "class {} has {} examples but {} partitions need one each",
                ds.class_names()[class],
                members.len(),
                required
            )));
        }
        members.shuffle(&mut rng);
        let [l, _, t] = apportion(members.len(), ratios.as_array());
        for &i in &members[..l] {
            partition[i] = Partition::Labeled;
        }
        for &i in &members[l..l + t] {
            partition[i] = Partition::Test;
        }
    }
    ds.clone().with_partitions(partition)
}
