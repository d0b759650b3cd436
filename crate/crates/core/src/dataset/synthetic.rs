//! Synthetic benchmarks with a known relevant feature set.

use std::path::Path;

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Matrix, PartitionedDataset};
use crate::error::{Error, Result};
use crate::seed;

const METADATA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub informative: usize,
    pub classes: usize,
    /// Probability that a label is replaced by a different, uniformly chosen class.
    pub noise: f64,
    pub seed: u64,
}

/// Label-generating rule, evaluated on the informative features only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticRule {
    /// class = number of thresholds strictly below `weights · x[informative]`
    LinearThreshold { weights: Vec<f64>, thresholds: Vec<f64> },
    /// class = nearest center (Euclidean) over the informative features
    Clusters { centers: Vec<Vec<f64>> },
}

/// Ground truth recorded next to a generated dataset (JSON sidecar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMetadata {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    pub informative: Vec<usize>,
    pub rule: SyntheticRule,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticMetadata {
    /// Noise-free class the rule assigns to a full-width row.
    pub fn evaluate_rule(&self, row: &[f64]) -> usize {
        let x = self.informative.iter().map(|&j| row[j]);
        match &self.rule {
            SyntheticRule::LinearThreshold {
                weights,
                thresholds,
            } => {
                let score: f64 = x.zip(weights).map(|(v, w)| v * w).sum();
                thresholds.iter().filter(|&&t| t < score).count()
            }
            SyntheticRule::Clusters { centers } => {
                let xs: Vec<f64> = x.collect();
                let mut best = (0, f64::INFINITY);
                for (c, center) in centers.iter().enumerate() {
                    let dist: f64 = xs.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dist < best.1 {
                        best = (c, dist);
                    }
                }
                best.0
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn check(n: usize, d: usize, informative: usize, classes: usize, noise: f64) -> Result<()> {
    if informative > d {
        return Err(Error::InvalidArgument(format!(
            "informative ({informative}) exceeds dimension ({d})"
        )));
    }
    if informative == 0 || n == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and informative >= 1".into()));
    }
    if classes < 2 {
        return Err(Error::InvalidArgument("need at least 2 classes".into()));
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(Error::InvalidArgument("noise must lie in [0, 0.5)".into()));
    }
    Ok(())
}

fn flip<R: rand::Rng>(rng: &mut R, label: usize, classes: usize, noise: f64) -> usize {
    if noise > 0.0 && rng.random::<f64>() < noise {
        let other = rng.random_range(0..classes - 1);
        if other >= label {
            other + 1
        } else {
            other
        }
    } else {
        label
    }
}

fn informative_set<R: rand::Rng>(rng: &mut R, d: usize, informative: usize) -> Vec<usize> {
    let mut idx = sample(rng, d, informative).into_vec();
    idx.sort_unstable();
    idx
}

/// Uniform `[-1, 1]` features; labels from a sparse linear-threshold rule over
/// `informative` randomly placed columns with ±1 weights. Class thresholds sit
/// at the empirical score quantiles, so classes are balanced before noise.
pub fn generate_synthetic(spec: SyntheticSpec) -> Result<(PartitionedDataset, SyntheticMetadata)> {
    let SyntheticSpec {
        n,
        d,
        informative,
        classes,
        noise,
        seed,
    } = spec;
    check(n, d, informative, classes, noise)?;
    let mut rng = seed::rng(seed);
    let inf = informative_set(&mut rng, d, informative);
    let weights: Vec<f64> = (0..informative)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();

    let data: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let features = Matrix::new(n, d, data)?;

    let scores: Vec<f64> = (0..n)
        .map(|i| {
            let row = features.row(i);
            inf.iter().zip(&weights).map(|(&j, w)| row[j] * w).sum()
        })
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let thresholds: Vec<f64> = (1..classes)
        .map(|c| {
            let pos = (c * n) / classes;
            if pos == 0 {
                sorted[0] - 1.0
            } else {
                0.5 * (sorted[pos - 1] + sorted[pos.min(n - 1)])
            }
        })
        .collect();

    let meta = SyntheticMetadata {
        version: METADATA_VERSION,
        n,
        d,
        classes,
        informative: inf,
        rule: SyntheticRule::LinearThreshold {
            weights,
            thresholds,
        },
        noise,
        seed,
    };
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let clean = meta.evaluate_rule(features.row(i));
            flip(&mut rng, clean, classes, noise)
        })
        .collect();
    let ds = PartitionedDataset::with_classes(features, labels, classes)?;
    Ok((ds, meta))
}

/// Gaussian class clusters: on the informative columns each class is centered
/// at a distinct vertex of the hypercube `{±separation/2}`; every column has
/// unit-variance noise. Labels are the generating class (then flipped with
/// probability `noise`).
pub fn generate_clusters(
    spec: SyntheticSpec,
    separation: f64,
) -> Result<(PartitionedDataset, SyntheticMetadata)> {
    let SyntheticSpec {
        n,
        d,
        informative,
        classes,
        noise,
        seed,
    } = spec;
    check(n, d, informative, classes, noise)?;
    let mut rng = seed::rng(seed);
    let inf = informative_set(&mut rng, d, informative);
    let distinct_possible = informative >= usize::BITS as usize || (1usize << informative) >= classes;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while centers.len() < classes {
        let c: Vec<f64> = if classes == 2 && centers.len() == 1 {
            centers[0].iter().map(|v| -v).collect()
        } else {
            (0..informative)
                .map(|_| if rng.random::<bool>() { 0.5 } else { -0.5 } * separation)
                .collect()
        };
        if !distinct_possible || !centers.contains(&c) {
            centers.push(c);
        }
    }

    let mut features = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.set(i, j, z);
        }
        for (k, &j) in inf.iter().enumerate() {
            let v = features.get(i, j) + centers[class][k];
            features.set(i, j, v);
        }
        labels.push(flip(&mut rng, class, classes, noise));
    }

    let meta = SyntheticMetadata {
        version: METADATA_VERSION,
        n,
        d,
        classes,
        informative: inf,
        rule: SyntheticRule::Clusters { centers },
        noise,
        seed,
    };
    let ds = PartitionedDataset::with_classes(features, labels, classes)?;
    Ok((ds, meta))
}
