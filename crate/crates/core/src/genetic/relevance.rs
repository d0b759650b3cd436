//! Irrelevance filtering with permuted-copy ("shadow") features.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{Candidate, GaConfig, SubsetEvaluator};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub generation: usize,
    pub mean_weight: f64,
    pub weight: f64,
    pub shadow_weight: f64,
}

/// Features permanently excluded from the search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RemovedSet {
    entries: BTreeMap<usize, Removal>,
}

impl RemovedSet {
    pub fn contains(&self, feature: usize) -> bool {
        self.entries.contains_key(&feature)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn len_within(&self, d: usize) -> usize {
        self.entries.range(..d).count()
    }

    pub fn insert(&mut self, feature: usize, removal: Removal) {
        self.entries.entry(feature).or_insert(removal);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &Removal)> {
        self.entries.iter()
    }

    pub fn features(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }
}

/// Population-normalized mean weight of every feature:
/// `sum_{S contains t} w_t^S / sum_S sum_{tau in S} w_tau^S`.
/// `None` for features no candidate carries.
pub fn average_weights(pop: &[Candidate], d: usize) -> Vec<Option<f64>> {
    let mut num = vec![0.0; d];
    let mut carried = vec![false; d];
    let mut denom = 0.0;
    for c in pop {
        for (&f, &w) in c.subset.indices().iter().zip(&c.weights) {
            num[f] += w;
            carried[f] = true;
            denom += w;
        }
    }
    (0..d)
        .map(|t| {
            carried[t].then(|| if denom > 0.0 { num[t] / denom } else { 0.0 })
        })
        .collect()
}

/// One relevance test. Suspicious features are live, carried by some
/// candidate, outside `best_parent`, and have mean weight `<= theta_out`.
/// Each is compared with a permuted copy in a forest over
/// `best_parent ∪ suspicious ∪ copies`; it is removed when its weight does
/// not exceed the copy's by more than `cfg.shadow_margin`.
///
/// Returns the newly removed features.
pub fn relevance_filter(
    pop: &[Candidate],
    removed: &RemovedSet,
    best_parent: &Candidate,
    evaluator: &dyn SubsetEvaluator,
    cfg: &GaConfig,
    generation: usize,
    seed: u64,
) -> Result<Vec<(usize, Removal)>> {
    let d = evaluator.dimension();
    let theta_out = cfg.theta_out.unwrap_or(0.5 / d as f64);
    let mean = average_weights(pop, d);
    let suspicious: Vec<usize> = (0..d)
        .filter(|&t| !removed.contains(t) && !best_parent.subset.contains(t))
        .filter(|&t| mean[t].is_some_and(|w| w <= theta_out))
        .collect();
    if suspicious.is_empty() {
        return Ok(Vec::new());
    }
    let (real, shadow) = evaluator.shadow_weights(best_parent.subset.indices(), &suspicious, seed)?;
    let mut out = Vec::new();
    for (k, &t) in suspicious.iter().enumerate() {
        if real[k] <= shadow[k] + cfg.shadow_margin {
            out.push((
                t,
                Removal {
                    generation,
                    mean_weight: mean[t].unwrap_or(0.0),
                    weight: real[k],
                    shadow_weight: shadow[k],
                },
            ));
        }
    }
    Ok(out)
}
