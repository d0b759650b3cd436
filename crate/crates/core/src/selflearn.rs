//! Self-learning: pseudo-label confident unlabeled rows, retrain, repeat.
//!
//! The per-class vote threshold is chosen to minimize
//! `J(theta_c) = error_c(theta_c) + (1 - coverage_c(theta_c))`, where among
//! rows predicted as class `c` with vote at least `theta_c`, `error_c` is the
//! mean of `1 - vote` and `coverage_c` the selected fraction. The criterion
//! trades confident labels against the number of labels added and has no
//! tunable constant.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::dataset::{project, FeatureSubset, Matrix, Partition, PartitionedDataset};
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, VoteMatrix};
use crate::seed;

/// Per-class vote thresholds, each in `[1/K, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdVector(pub Vec<f64>);

impl ThresholdVector {
    pub fn uniform(classes: usize, value: f64) -> Self {
        Self(vec![value; classes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub class: usize,
    /// vote for `class` when the label was assigned
    pub vote: f64,
    /// threshold of `class` in that round
    pub threshold: f64,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub training_rows: usize,
    pub remaining: usize,
    pub thresholds: Vec<f64>,
    pub selected: usize,
    pub coverage: f64,
}

/// Labeled rows plus pseudo-labeled unlabeled rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSet {
    base: PartitionedDataset,
    pseudo: BTreeMap<usize, PseudoLabel>,
    rounds: usize,
    trace: Vec<RoundTrace>,
}

impl AugmentedSet {
    /// An augmented set without pseudo-labels.
    pub fn from_labeled(base: PartitionedDataset) -> Self {
        Self {
            base,
            pseudo: BTreeMap::new(),
            rounds: 0,
            trace: Vec::new(),
        }
    }

    pub fn base(&self) -> &PartitionedDataset {
        &self.base
    }

    pub fn pseudo_labels(&self) -> &BTreeMap<usize, PseudoLabel> {
        &self.pseudo
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn trace(&self) -> &[RoundTrace] {
        &self.trace
    }

    /// Training rows (labeled first, then pseudo-labeled, each in index order),
    /// their labels, and whether each row is a genuinely labeled one.
    pub fn training_rows(&self) -> (Vec<usize>, Vec<usize>, Vec<bool>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut labeled = Vec::new();
        for i in self.base.indices(Partition::Labeled) {
            rows.push(i);
            labels.push(self.base.observed()[i]);
            labeled.push(true);
        }
        for (&i, p) in &self.pseudo {
            rows.push(i);
            labels.push(p.class);
            labeled.push(false);
        }
        (rows, labels, labeled)
    }

    /// Feature matrix of the training rows restricted to `columns`
    /// (all columns when `None`).
    pub fn training_matrix(&self, columns: Option<&[usize]>) -> (Matrix, Vec<usize>, Vec<bool>) {
        let (rows, labels, labeled) = self.training_rows();
        let x = match columns {
            Some(cols) => self.base.features().select(&rows, cols),
            None => self.base.features().select_rows(&rows),
        };
        (x, labels, labeled)
    }

    /// Unlabeled rows not yet pseudo-labeled.
    pub fn remaining(&self) -> Vec<usize> {
        self.base
            .indices(Partition::Unlabeled)
            .into_iter()
            .filter(|i| !self.pseudo.contains_key(i))
            .collect()
    }

    /// Fraction of the unlabeled partition that carries a pseudo-label.
    pub fn coverage(&self) -> f64 {
        let u = self.base.count(Partition::Unlabeled);
        if u == 0 {
            0.0
        } else {
            self.pseudo.len() as f64 / u as f64
        }
    }

    /// Agreement of pseudo-labels with the hidden ground truth.
    pub fn pseudo_label_accuracy(&self) -> Option<f64> {
        if self.pseudo.is_empty() {
            return None;
        }
        let right = self
            .pseudo
            .iter()
            .filter(|(&i, p)| self.base.truth()[i] == p.class)
            .count();
        Some(right as f64 / self.pseudo.len() as f64)
    }

    pub fn project(&self, subset: &FeatureSubset) -> Result<AugmentedSet> {
        Ok(AugmentedSet {
            base: project(&self.base, subset)?,
            ..self.clone()
        })
    }

    /// Replace each pseudo-label, with probability `rate`, by a uniformly
    /// chosen different class.
    pub fn corrupt_pseudo_labels(&self, rate: f64, seed: u64) -> AugmentedSet {
        let k = self.base.class_count();
        let mut rng = seed::rng(seed);
        let mut out = self.clone();
        if k < 2 {
            return out;
        }
        for p in out.pseudo.values_mut() {
            if rng.random::<f64>() < rate {
                let other = rng.random_range(0..k - 1);
                p.class = if other >= p.class { other + 1 } else { other };
            }
        }
        out
    }
}

/// Selection error and coverage at thresholds `theta` over all rows of `votes`.
/// An empty selection yields `(1, 0)`.
pub fn conditional_error(votes: &VoteMatrix, theta: &ThresholdVector) -> (f64, f64) {
    let u = votes.rows();
    let mut err = 0.0;
    let mut selected = 0usize;
    for x in 0..u {
        let c = votes.argmax(x);
        let v = votes.row(x)[c];
        if v >= theta.0[c] {
            err += 1.0 - v;
            selected += 1;
        }
    }
    if selected == 0 {
        return (1.0, 0.0);
    }
    (err / selected as f64, selected as f64 / u as f64)
}

/// Per-class objective over the candidate grid; `None` when no row predicts `class`.
pub(crate) fn class_objective(votes: &VoteMatrix, class: usize) -> Option<Vec<(f64, f64)>> {
    let k = votes.classes();
    let mut mine: Vec<f64> = (0..votes.rows())
        .filter(|&x| votes.argmax(x) == class)
        .map(|x| votes.row(x)[class])
        .collect();
    if mine.is_empty() {
        return None;
    }
    mine.sort_by(|a, b| b.total_cmp(a));
    let m = mine.len() as f64;
    let mut grid: Vec<f64> = mine.clone();
    grid.push(1.0 / k as f64);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // votes descending; for a threshold, the selected rows are a prefix
    let mut out = Vec::with_capacity(grid.len());
    let mut taken = 0usize;
    let mut sum_err = 0.0;
    for &theta in grid.iter().rev() {
        while taken < mine.len() && mine[taken] >= theta {
            sum_err += 1.0 - mine[taken];
            taken += 1;
        }
        let j = if taken == 0 {
            2.0
        } else {
            sum_err / taken as f64 + (1.0 - taken as f64 / m)
        };
        out.push((theta, j));
    }
    out.reverse();
    Some(out)
}

/// Minimize the per-class objective over the observed votes (plus `1/K`);
/// ties prefer the lower threshold. Classes nobody predicts get threshold 1.
pub fn find_threshold(votes: &VoteMatrix) -> Result<ThresholdVector> {
    if votes.rows() == 0 {
        return Err(Error::InvalidArgument("empty unlabeled set".into()));
    }
    let theta = (0..votes.classes())
        .map(|c| match class_objective(votes, c) {
            None => 1.0,
            Some(grid) => {
                let mut best = grid[0];
                for &(t, j) in &grid[1..] {
                    if j < best.1 - 1e-15 {
                        best = (t, j);
                    }
                }
                best.0
            }
        })
        .collect();
    Ok(ThresholdVector(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlaConfig {
    pub max_rounds: usize,
}

impl Default for SlaConfig {
    fn default() -> Self {
        Self { max_rounds: 10 }
    }
}

fn fit_augmented(aug: &AugmentedSet, fcfg: &ForestConfig, round: usize) -> Result<Forest> {
    let (x, y, _) = aug.training_matrix(None);
    Forest::fit(&x, &y, aug.base.class_count(), &fcfg.with_seed(seed::derive(fcfg.seed, &[round as u64])))
}

/// Self-learning loop. Pseudo-labels are never revised. Returns the augmented
/// set and a forest fitted on it.
pub fn sla(ds: &PartitionedDataset, fcfg: &ForestConfig, cfg: SlaConfig) -> Result<(AugmentedSet, Forest)> {
    sla_with_deadline(ds, fcfg, cfg, Deadline::none())
}

pub fn sla_with_deadline(
    ds: &PartitionedDataset,
    fcfg: &ForestConfig,
    cfg: SlaConfig,
    deadline: Deadline,
) -> Result<(AugmentedSet, Forest)> {
    if ds.count(Partition::Labeled) == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let mut aug = AugmentedSet::from_labeled(ds.clone());
    let mut forest = fit_augmented(&aug, fcfg, 0)?;

    while aug.rounds < cfg.max_rounds {
        deadline.check()?;
        let remaining = aug.remaining();
        if remaining.is_empty() {
            break;
        }
        let votes = forest.votes(&ds.features().select_rows(&remaining))?;
        let theta = find_threshold(&votes)?;
        let round = aug.rounds + 1;
        let mut selected = 0;
        for (k, &i) in remaining.iter().enumerate() {
            let c = votes.argmax(k);
            let v = votes.row(k)[c];
            if v >= theta.0[c] {
                aug.pseudo.insert(
                    i,
                    PseudoLabel {
                        class: c,
                        vote: v,
                        threshold: theta.0[c],
                        round,
                    },
                );
                selected += 1;
            }
        }
        let (training_rows, _, _) = aug.training_rows();
        aug.trace.push(RoundTrace {
            round,
            training_rows: training_rows.len() - selected,
            remaining: remaining.len(),
            thresholds: theta.0.clone(),
            selected,
            coverage: selected as f64 / remaining.len() as f64,
        });
        log::debug!(
            "sla round {round}: {selected}/{} pseudo-labeled, thresholds {:?}",
            remaining.len(),
            theta.0
        );
        if selected == 0 {
            break;
        }
        aug.rounds = round;
        forest = fit_augmented(&aug, fcfg, round)?;
    }
    Ok((aug, forest))
}
