//! Datasets with labeled / unlabeled / test partitions.
//!
//! Every row keeps its ground-truth class. The class a learner may see is
//! the *observed* label, and only for rows outside the unlabeled partition.
//! Unlabeled rows keep their truth so accuracy on them can be measured.

mod io;
mod split;
mod synthetic;

pub use io::{load_csv, load_libsvm, write_csv, write_libsvm, CsvSchema};
pub use split::{split, SplitRatios};
pub use synthetic::{generate_clusters, generate_synthetic, SyntheticMetadata, SyntheticSpec};

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::MislabelingMatrix;
use crate::error::{Error, Result};
use crate::seed;

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from row vectors; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Rows in the given order (duplicates allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Columns in the given order (duplicates allowed).
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Rows and columns at once, avoiding an intermediate copy.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Append `other`'s columns to the right of `self`'s.
    pub fn hstack(&self, other: &Matrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
        })
    }
}

/// Which part of the experiment a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Labeled,
    Unlabeled,
    Test,
}

/// Sorted, duplicate-free, non-empty set of zero-based feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSubset(Vec<usize>);

impl FeatureSubset {
    /// Sorts and deduplicates `indices`; fails if empty or any index is `>= dimension`.
    pub fn new(mut indices: Vec<usize>, dimension: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&max) = indices.last() {
            if max >= dimension {
                return Err(Error::FeatureOutOfRange {
                    index: max,
                    dimension,
                });
            }
        }
        Ok(Self(indices))
    }

    pub fn all(dimension: usize) -> Self {
        Self((0..dimension).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.0.binary_search(&feature).is_ok()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Feature matrix with per-row labels and partition tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedDataset {
    features: Matrix,
    truth: Vec<usize>,
    observed: Vec<usize>,
    partition: Vec<Partition>,
    class_names: Vec<String>,
}

impl PartitionedDataset {
    /// All rows start in the labeled partition with observed label = truth.
    pub fn new(features: Matrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(Error::InvalidClass {
                class: bad,
                classes: class_names.len(),
            });
        }
        let n = labels.len();
        Ok(Self {
            features,
            observed: labels.clone(),
            truth: labels,
            partition: vec![Partition::Labeled; n],
            class_names,
        })
    }

    /// Convenience constructor naming classes `0..k`.
    pub fn with_classes(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let names = (0..class_count).map(|c| c.to_string()).collect();
        Self::new(features, labels, names)
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        self.features.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// Ground-truth classes, including those hidden in the unlabeled partition.
    pub fn truth(&self) -> &[usize] {
        &self.truth
    }

    /// Labels a learner trains on (may be corrupted by [`inject_label_noise`]).
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partition
    }

    /// Visible label of row `i`; `None` for unlabeled rows.
    pub fn label(&self, i: usize) -> Option<usize> {
        match self.partition[i] {
            Partition::Unlabeled => None,
            _ => Some(self.observed[i]),
        }
    }

    pub fn indices(&self, part: Partition) -> Vec<usize> {
        self.partition
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == part)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, part: Partition) -> usize {
        self.partition.iter().filter(|&&p| p == part).count()
    }

    pub fn with_partitions(mut self, partition: Vec<Partition>) -> Result<Self> {
        if partition.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: partition.len(),
            });
        }
        self.partition = partition;
        Ok(self)
    }

    /// SHA-256 over shape, feature bits and labels; identifies a dataset in subset files.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dimension() as u64).to_le_bytes());
        for v in self.features.as_slice() {
            h.update(v.to_bits().to_le_bytes());
        }
        for &y in &self.truth {
            h.update((y as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Restrict columns to `subset`, keeping partitions and labels.
pub fn project(ds: &PartitionedDataset, subset: &FeatureSubset) -> Result<PartitionedDataset> {
    if let Some(&max) = subset.indices().last() {
        if max >= ds.dimension() {
            return Err(Error::FeatureOutOfRange {
                index: max,
                dimension: ds.dimension(),
            });
        }
    }
    Ok(PartitionedDataset {
        features: ds.features.select_columns(subset.indices()),
        ..ds.clone()
    })
}

/// Corrupt observed labels of the labeled partition: a row of true class `j`
/// receives label `i` with probability `p(i, j)`. Truth is left untouched.
pub fn inject_label_noise(
    ds: &PartitionedDataset,
    p: &MislabelingMatrix,
    seed: u64,
) -> Result<PartitionedDataset> {
    let k = ds.class_count();
    if p.class_count() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: p.class_count(),
        });
    }
    p.validate()?;
    let mut rng = seed::rng(seed);
    let mut out = ds.clone();
    for i in 0..ds.len() {
        if ds.partition[i] != Partition::Labeled {
            continue;
        }
        let j = ds.truth[i];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = k - 1;
        for cand in 0..k {
            acc += p.get(cand, j);
            if u < acc {
                chosen = cand;
                break;
            }
        }
        // zero-probability tail classes are never chosen by rounding slack
        while p.get(chosen, j) == 0.0 && chosen > 0 {
            chosen -= 1;
        }
        out.observed[i] = chosen;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, d: usize) -> PartitionedDataset {
        let data = (0..n * d).map(|v| v as f64).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        PartitionedDataset::with_classes(Matrix::new(n, d, data).unwrap(), labels, 2).unwrap()
    }

    #[test]
    fn project_picks_columns_in_sorted_order() {
        let ds = toy(3, 5);
        let s = FeatureSubset::new(vec![3, 1], 5).unwrap();
        let p = project(&ds, &s).unwrap();
        assert_eq!(p.dimension(), 2);
        assert_eq!(p.features().row(0), &[1.0, 3.0]);
        assert_eq!(p.features().row(2), &[11.0, 13.0]);
        assert_eq!(p.truth(), ds.truth());
    }

    #[test]
    fn project_full_subset_is_identity() {
        let ds = toy(4, 3);
        assert_eq!(project(&ds, &FeatureSubset::all(3)).unwrap(), ds);
    }

    #[test]
    fn out_of_range_subset_rejected() {
        assert!(matches!(
            FeatureSubset::new(vec![7], 5),
            Err(Error::FeatureOutOfRange { index: 7, .. })
        ));
        assert!(matches!(FeatureSubset::new(vec![], 5), Err(Error::EmptySubset)));
    }

    #[test]
    fn nested_projection_composes() {
        let ds = toy(4, 6);
        let outer = FeatureSubset::new(vec![0, 2, 3, 5], 6).unwrap();
        let p1 = project(&ds, &outer).unwrap();
        // positions 1 and 3 of the outer projection are features 2 and 5
        let inner_local = FeatureSubset::new(vec![1, 3], 4).unwrap();
        let inner = FeatureSubset::new(vec![2, 5], 6).unwrap();
        assert_eq!(
            project(&p1, &inner_local).unwrap(),
            project(&ds, &inner).unwrap()
        );
    }

    #[test]
    fn identity_noise_keeps_labels() {
        let ds = toy(50, 2);
        let out = inject_label_noise(&ds, &MislabelingMatrix::identity(2), 3).unwrap();
        assert_eq!(out.observed(), ds.observed());
    }

    #[test]
    fn deterministic_corruption() {
        let ds = toy(50, 2);
        let p = MislabelingMatrix::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let out = inject_label_noise(&ds, &p, 3).unwrap();
        assert!(out.observed().iter().all(|&y| y == 1));
        assert_eq!(out.truth(), ds.truth());
    }

    #[test]
    fn noise_rate_matches_matrix_entry() {
        let n = 10_000;
        let ds = PartitionedDataset::with_classes(Matrix::zeros(n, 1), vec![0; n], 2).unwrap();
        let p = MislabelingMatrix::new(vec![vec![0.7, 0.0], vec![0.3, 1.0]]).unwrap();
        let out = inject_label_noise(&ds, &p, 11).unwrap();
        let rate = out.observed().iter().filter(|&&y| y == 1).count() as f64 / n as f64;
        assert!((0.27..=0.33).contains(&rate), "rate {rate}");
    }

    #[test]
    fn non_stochastic_matrix_rejected() {
        let ds = toy(4, 2);
        let p = MislabelingMatrix::from_raw(vec![vec![0.5, 0.0], vec![0.2, 1.0]]);
        assert!(inject_label_noise(&ds, &p, 0).is_err());
    }
}
