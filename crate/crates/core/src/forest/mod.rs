//! Random-forest majority vote.
//!
//! A tree votes with the class fractions of the leaf an example falls into;
//! the forest vote is the unweighted mean over trees. Argmax ties go to the
//! smallest class index.

mod tree;

pub use tree::{Node, Tree};

use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::error::{Error, Result};
use crate::seed;
use tree::GrowParams;

const FOREST_FORMAT_VERSION: u32 = 1;
const ROW_TOL: f64 = 1e-9;

/// How many candidate features each node examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    /// `ceil(sqrt(d))`
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, d: usize) -> usize {
        let k = match self {
            Self::Sqrt => (d as f64).sqrt().ceil() as usize,
            Self::All => d,
            Self::Count(c) => c,
        };
        k.clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    /// Sample rows with replacement per tree; disable only for diagnostics.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            tree_count: 200,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::InvalidArgument("tree_count must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// `n x K` matrix of class votes; rows are probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteMatrix {
    rows: usize,
    classes: usize,
    data: Vec<f64>,
}

impl VoteMatrix {
    /// Checks that every row is non-negative and sums to 1.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows);
        for r in 0..m.rows {
            let row = m.row(r);
            if row.iter().any(|&v| !(v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidArgument(format!(
                    "vote row {r} is not a probability vector"
                )));
            }
        }
        Ok(m)
    }

    pub fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let classes = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        Self {
            rows: n,
            classes,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.classes..(i + 1) * self.classes]
    }

    /// Index of the largest vote; ties resolve to the smallest class.
    pub fn argmax(&self, i: usize) -> usize {
        argmax(self.row(i))
    }

    pub fn predictions(&self) -> Vec<usize> {
        (0..self.rows).map(|i| self.argmax(i)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.classes);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            classes: self.classes,
            data,
        }
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (c, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = c;
        }
    }
    best
}

/// Out-of-bag votes; rows in-bag for every tree are uncovered and hold a
/// uniform placeholder vote.
#[derive(Debug, Clone, PartialEq)]
pub struct OobVotes {
    pub votes: VoteMatrix,
    pub covered: Vec<bool>,
}

impl OobVotes {
    pub fn coverage(&self) -> f64 {
        if self.covered.is_empty() {
            return 0.0;
        }
        self.covered.iter().filter(|&&c| c).count() as f64 / self.covered.len() as f64
    }

    pub fn covered_rows(&self) -> Vec<usize> {
        (0..self.covered.len()).filter(|&i| self.covered[i]).collect()
    }

    /// Argmax per row, `None` where uncovered.
    pub fn predictions(&self) -> Vec<Option<usize>> {
        (0..self.covered.len())
            .map(|i| self.covered[i].then(|| self.votes.argmax(i)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    version: u32,
    trees: Vec<Tree>,
    /// per tree, multiplicity of every training row in its bootstrap sample
    in_bag: Vec<Vec<u32>>,
    classes: usize,
    dimension: usize,
    training_rows: usize,
    /// fewer than two distinct classes in the training labels
    degenerate: bool,
}

impl Forest {
    /// Grow `cfg.tree_count` trees. Tree `t` uses a random stream derived from
    /// `(cfg.seed, t)` so the result does not depend on the thread count.
    pub fn fit(x: &Matrix, y: &[usize], classes: usize, cfg: &ForestConfig) -> Result<Forest> {
        cfg.validate()?;
        let n = x.rows();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= classes) {
            return Err(Error::InvalidClass { class: bad, classes });
        }
        let mut present = vec![false; classes];
        y.iter().for_each(|&c| present[c] = true);
        let degenerate = present.iter().filter(|&&p| p).count() < 2;

        let params = GrowParams {
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf as f64,
            features_per_split: cfg.features_per_split.resolve(x.cols()),
        };
        let grown: Vec<(Tree, Vec<u32>)> = (0..cfg.tree_count)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng_for(cfg.seed, &[t as u64]);
                let mut counts = vec![0u32; n];
                if cfg.bootstrap {
                    for _ in 0..n {
                        counts[rng.random_range(0..n)] += 1;
                    }
                } else {
                    counts.iter_mut().for_each(|c| *c = 1);
                }
                let weights: Vec<f64> = counts.iter().map(|&c| f64::from(c)).collect();
                let tree = Tree::grow(x, y, &weights, classes, &params, &mut rng);
                (tree, counts)
            })
            .collect();
        let (trees, in_bag) = grown.into_iter().unzip();
        Ok(Forest {
            version: FOREST_FORMAT_VERSION,
            trees,
            in_bag,
            classes,
            dimension: x.cols(),
            training_rows: n,
            degenerate,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn in_bag(&self, tree: usize) -> &[u32] {
        &self.in_bag[tree]
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn trained_dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn check_dimension(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Mean over trees of the leaf class fractions reached by each row.
    pub fn votes(&self, x: &Matrix) -> Result<VoteMatrix> {
        self.check_dimension(x)?;
        let k = self.classes;
        let scale = 1.0 / self.trees.len() as f64;
        let mut data = vec![0.0; x.rows() * k];
        data.par_chunks_mut(k).enumerate().for_each(|(i, out)| {
            let row = x.row(i);
            for tree in &self.trees {
                for (o, v) in out.iter_mut().zip(tree.leaf_for(row)) {
                    *o += v;
                }
            }
            out.iter_mut().for_each(|o| *o *= scale);
        });
        Ok(VoteMatrix {
            rows: x.rows(),
            classes: k,
            data,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.votes(x)?.predictions())
    }

    /// Votes on the training rows using only the trees whose bootstrap left
    /// each row out. `x` must be the matrix the forest was fitted on.
    pub fn oob_votes(&self, x: &Matrix) -> Result<OobVotes> {
        self.check_dimension(x)?;
        if x.rows() != self.training_rows {
            return Err(Error::DimensionMismatch {
                expected: self.training_rows,
                actual: x.rows(),
            });
        }
        let k = self.classes;
        let mut data = vec![0.0; x.rows() * k];
        let mut covered = vec![false; x.rows()];
        data.par_chunks_mut(k)
            .zip(covered.par_iter_mut())
            .enumerate()
            .for_each(|(i, (out, cov))| {
                let row = x.row(i);
                let mut used = 0usize;
                for (tree, bag) in self.trees.iter().zip(&self.in_bag) {
                    if bag[i] == 0 {
                        used += 1;
                        for (o, v) in out.iter_mut().zip(tree.leaf_for(row)) {
                            *o += v;
                        }
                    }
                }
                if used == 0 {
                    out.iter_mut().for_each(|o| *o = 1.0 / k as f64);
                } else {
                    out.iter_mut().for_each(|o| *o /= used as f64);
                    *cov = true;
                }
            });
        Ok(OobVotes {
            votes: VoteMatrix {
                rows: x.rows(),
                classes: k,
                data,
            },
            covered,
        })
    }

    /// Misclassification rate of the out-of-bag argmax over covered rows.
    pub fn oob_error(&self, x: &Matrix, y: &[usize]) -> Result<f64> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                actual: y.len(),
            });
        }
        oob_error_from(&self.oob_votes(x)?, y)
    }

    /// Mean-decrease-impurity importance averaged over trees, normalized to sum
    /// to 1. A forest without any split yields uniform weights.
    pub fn feature_weights(&self) -> Vec<f64> {
        let d = self.dimension;
        let mut w = vec![0.0; d];
        for tree in &self.trees {
            for (acc, v) in w.iter_mut().zip(tree.importance()) {
                *acc += v;
            }
        }
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|v| *v /= total);
        } else if d > 0 {
            w.iter_mut().for_each(|v| *v = 1.0 / d as f64);
        }
        w
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_json(path: &Path) -> Result<Forest> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let forest: Forest = serde_json::from_str(&text)?;
        if forest.version != FOREST_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported forest format version {}",
                forest.version
            )));
        }
        Ok(forest)
    }
}

pub(crate) fn oob_error_from(oob: &OobVotes, y: &[usize]) -> Result<f64> {
    let mut seen = 0usize;
    let mut wrong = 0usize;
    for (i, &label) in y.iter().enumerate() {
        if oob.covered[i] {
            seen += 1;
            if oob.votes.argmax(i) != label {
                wrong += 1;
            }
        }
    }
    if seen == 0 {
        return Err(Error::ZeroCoverage);
    }
    Ok(wrong as f64 / seen as f64)
}
