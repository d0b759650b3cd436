//! Subset scoring on the augmented training set.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundValue, MarginMoments, MislabelingMatrix, DEFAULT_SMOOTHING};
use crate::dataset::{FeatureSubset, Matrix, Partition, PartitionedDataset};
use crate::error::{Error, Result};
use crate::forest::{oob_error_from, Forest, ForestConfig, VoteMatrix};
use crate::genetic::{Evaluation, SubsetEvaluator};
use crate::selflearn::AugmentedSet;
use crate::seed;

/// Subset-scoring criterion (lower is better for all three).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// out-of-bag error of the forest
    Oob,
    /// plain C-bound
    Cb,
    /// C-bound corrected for imperfect labels
    Cbil,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Oob, Criterion::Cb, Criterion::Cbil];

    pub fn name(self) -> &'static str {
        match self {
            Self::Oob => "OOB",
            Self::Cb => "CB",
            Self::Cbil => "CBIL",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oob" => Ok(Self::Oob),
            "cb" => Ok(Self::Cb),
            "cbil" => Ok(Self::Cbil),
            other => Err(Error::Config(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Where the mislabeling constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// once per selection run, from a labeled-only forest over all features
    Fixed,
    /// per subset, from the out-of-bag predictions on the labeled rows
    PerSubset,
}

/// Votes that feed the margin moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotePool {
    /// out-of-bag votes on covered training rows
    OutOfBag,
    /// votes of the full forest on its own training rows
    InSample,
}

/// Rows the per-subset forest is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingPool {
    Augmented,
    LabeledOnly,
}

/// Everything one subset fit produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScores {
    pub oob_error: f64,
    pub moments: MarginMoments,
    pub cbound: BoundValue,
    pub cbound_il: BoundValue,
    pub gamma: f64,
    /// feature weights over the subset members, summing to 1
    pub weights: Vec<f64>,
}

impl SubsetScores {
    pub fn value(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Oob => self.oob_error,
            Criterion::Cb => self.cbound.value,
            Criterion::Cbil => self.cbound_il.value,
        }
    }
}

/// Mislabeling matrix of a forest fitted on the labeled rows of `ds`,
/// comparing its out-of-bag predictions with the observed labels.
pub fn estimate_label_noise(ds: &PartitionedDataset, fcfg: &ForestConfig) -> Result<MislabelingMatrix> {
    let rows = ds.indices(Partition::Labeled);
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let x = ds.features().select_rows(&rows);
    let y: Vec<usize> = rows.iter().map(|&i| ds.observed()[i]).collect();
    let forest = Forest::fit(&x, &y, ds.class_count(), fcfg)?;
    let oob = forest.oob_votes(&x)?;
    bounds::estimate_mislabeling(&y, &oob.predictions(), ds.class_count(), DEFAULT_SMOOTHING)
}

/// Fits a forest per subset on a fixed training set and scores it.
#[derive(Debug, Clone)]
pub struct EvaluationContext {
    x: Matrix,
    y: Vec<usize>,
    labeled: Vec<bool>,
    classes: usize,
    forest: ForestConfig,
    criterion: Criterion,
    gamma: f64,
    gamma_mode: GammaMode,
    vote_pool: VotePool,
}

impl EvaluationContext {
    pub fn new(aug: &AugmentedSet, forest: &ForestConfig, criterion: Criterion, gamma: f64) -> Result<Self> {
        Self::with_modes(aug, forest, criterion, gamma, GammaMode::Fixed, VotePool::OutOfBag, TrainingPool::Augmented)
    }

    pub fn with_modes(
        aug: &AugmentedSet,
        forest: &ForestConfig,
        criterion: Criterion,
        gamma: f64,
        gamma_mode: GammaMode,
        vote_pool: VotePool,
        training_pool: TrainingPool,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        forest.validate()?;
        let (mut x, mut y, mut labeled) = aug.training_matrix(None);
        if training_pool == TrainingPool::LabeledOnly {
            let keep: Vec<usize> = (0..labeled.len()).filter(|&i| labeled[i]).collect();
            x = x.select_rows(&keep);
            y = keep.iter().map(|&i| y[i]).collect();
            labeled = vec![true; keep.len()];
        }
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(Self {
            x,
            y,
            labeled,
            classes: aug.base().class_count(),
            forest: forest.clone(),
            criterion,
            gamma,
            gamma_mode,
            vote_pool,
        })
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn training_rows(&self) -> usize {
        self.y.len()
    }

    fn fit(&self, cols: &[usize], seed: u64) -> Result<(Matrix, Forest)> {
        let x = self.x.select_columns(cols);
        let forest = Forest::fit(&x, &self.y, self.classes, &self.forest.with_seed(seed))?;
        Ok((x, forest))
    }

    /// Fit a forest on `subset` and compute every criterion from it.
    pub fn scores(&self, subset: &FeatureSubset, seed: u64) -> Result<SubsetScores> {
        if let Some(&f) = subset.indices().iter().find(|&&f| f >= self.x.cols()) {
            return Err(Error::FeatureOutOfRange {
                index: f,
                dimension: self.x.cols(),
            });
        }
        let (x, forest) = self.fit(subset.indices(), seed)?;
        let oob = forest.oob_votes(&x)?;
        let covered = oob.covered_rows();

        let votes: VoteMatrix = match self.vote_pool {
            VotePool::OutOfBag if !covered.is_empty() => oob.votes.select_rows(&covered),
            _ => forest.votes(&x)?,
        };
        let moments = bounds::margin_moments(&votes, &votes)?;

        let oob_error = match oob_error_from(&oob, &self.y) {
            Ok(e) => e,
            Err(Error::ZeroCoverage) => {
                let pred = forest.votes(&x)?.predictions();
                pred.iter().zip(&self.y).filter(|(p, y)| p != y).count() as f64 / self.y.len() as f64
            }
            Err(e) => return Err(e),
        };

        let gamma = match self.gamma_mode {
            GammaMode::Fixed => self.gamma,
            GammaMode::PerSubset => {
                let rows: Vec<usize> = (0..self.y.len()).filter(|&i| self.labeled[i]).collect();
                let pred = oob.predictions();
                let truth: Vec<usize> = rows.iter().map(|&i| self.y[i]).collect();
                let pred: Vec<Option<usize>> = rows.iter().map(|&i| pred[i]).collect();
                bounds::estimate_mislabeling(&truth, &pred, self.classes, DEFAULT_SMOOTHING)?.gamma()
            }
        };

        Ok(SubsetScores {
            oob_error,
            cbound: bounds::cbound(&moments),
            cbound_il: bounds::cbound_il(&moments, gamma)?,
            moments,
            gamma,
            weights: forest.feature_weights(),
        })
    }
}

impl SubsetEvaluator for EvaluationContext {
    fn dimension(&self) -> usize {
        self.x.cols()
    }

    fn evaluate(&self, subset: &FeatureSubset, seed: u64) -> Result<Evaluation> {
        let s = self.scores(subset, seed)?;
        Ok(Evaluation {
            fitness: s.value(self.criterion),
            weights: s.weights,
        })
    }

    fn shadow_weights(&self, base: &[usize], suspicious: &[usize], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        let cols: Vec<usize> = base.iter().chain(suspicious).copied().collect();
        let real = self.x.select_columns(&cols);
        let mut rng = seed::rng_for(seed, &[0]);
        let n = self.x.rows();
        let mut shadow = Matrix::zeros(n, suspicious.len());
        for (k, &f) in suspicious.iter().enumerate() {
            let mut col = self.x.column(f);
            col.shuffle(&mut rng);
            for (i, v) in col.into_iter().enumerate() {
                shadow.set(i, k, v);
            }
        }
        let x = real.hstack(&shadow)?;
        let forest = Forest::fit(&x, &self.y, self.classes, &self.forest.with_seed(seed::derive(seed, &[1])))?;
        let w = forest.feature_weights();
        let off = base.len();
        let s = suspicious.len();
        Ok((w[off..off + s].to_vec(), w[off + s..off + 2 * s].to_vec()))
    }
}
