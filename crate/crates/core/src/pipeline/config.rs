//! Versioned experiment configuration (TOML or JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::context::{Criterion, GammaMode, TrainingPool, VotePool};
use crate::dataset::{self, CsvSchema, PartitionedDataset, SplitRatios, SyntheticSpec};
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::genetic::GaConfig;
use crate::selflearn::SlaConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default = "default_true")]
        header: bool,
    },
    Libsvm {
        path: PathBuf,
    },
    Synthetic(SyntheticSpec),
    Clusters {
        #[serde(flatten)]
        spec: SyntheticSpec,
        separation: f64,
    },
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

impl DatasetSource {
    /// Read or generate the dataset (all rows labeled, no split yet).
    pub fn load(&self) -> Result<PartitionedDataset> {
        match self {
            Self::Csv {
                path,
                label_column,
                delimiter,
                header,
            } => {
                let delimiter = u8::try_from(*delimiter)
                    .map_err(|_| Error::Config(format!("delimiter {delimiter:?} is not a single byte")))?;
                dataset::load_csv(
                    path,
                    label_column,
                    CsvSchema {
                        delimiter,
                        has_header: *header,
                    },
                )
            }
            Self::Libsvm { path } => dataset::load_libsvm(path),
            Self::Synthetic(spec) => Ok(dataset::generate_synthetic(*spec)?.0),
            Self::Clusters { spec, separation } => Ok(dataset::generate_clusters(*spec, *separation)?.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub dataset: Option<DatasetSource>,
    pub split: SplitRatios,
    pub trials: usize,
    /// seconds per trial
    pub time_limit: Option<f64>,
    pub seed: u64,
    pub criterion: Criterion,
    pub gamma_mode: GammaMode,
    pub vote_pool: VotePool,
    pub training_pool: TrainingPool,
    /// worker threads for trials and forests; 0 uses every core
    pub workers: usize,
    pub forest: ForestConfig,
    pub ga: GaConfig,
    pub sla: SlaConfig,
    /// random subsets drawn by the criterion comparison
    pub comparison_subsets: usize,
    /// skip the end-to-end accuracy of every comparison subset
    pub skip_gt: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            dataset: None,
            split: SplitRatios {
                labeled: 0.1,
                unlabeled: 0.8,
                test: 0.1,
            },
            trials: 20,
            time_limit: None,
            seed: 0,
            criterion: Criterion::Cbil,
            gamma_mode: GammaMode::Fixed,
            vote_pool: VotePool::OutOfBag,
            training_pool: TrainingPool::Augmented,
            workers: 0,
            forest: ForestConfig::default(),
            ga: GaConfig::default(),
            sla: SlaConfig::default(),
            comparison_subsets: 40,
            skip_gt: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("time_limit must be a positive number of seconds".into()));
        }
        if self.comparison_subsets == 0 {
            return Err(Error::Config("comparison_subsets must be >= 1".into()));
        }
        self.split.validate()?;
        self.forest.validate()?;
        self.ga.validate()
    }

    /// Parse a config file; `.json` is read as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn time_limit(&self) -> Option<std::time::Duration> {
        self.time_limit.map(std::time::Duration::from_secs_f64)
    }
}
