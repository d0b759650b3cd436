//! Multi-trial experiments: resplit, select, evaluate, aggregate.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::protocol::{
    criterion_comparison_with_deadline, evaluate_selection_with_deadline, evaluation_forest,
    sewil_select_with_deadline, CriterionComparison,
};
use super::report::{
    CriteriaReport, CriteriaTrial, EvaluationReport, EvaluationTrial, SearchReport, SelectionReport, TrialRecord,
};
use crate::budget::Deadline;
use crate::dataset::{split, PartitionedDataset};
use crate::error::{Error, Result};
use crate::genetic::Scheme;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Completed,
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome<T> {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub value: Option<T>,
    pub wall_seconds: f64,
}

/// Seed of trial `t` under a master seed.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    seed::derive(master, &[trial as u64])
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Run `body` once per trial on a fresh split. Each trial gets a config whose
/// `seed` is the trial seed and a deadline of `cfg.time_limit`; a trial that
/// exceeds it is recorded as timed out. Other errors abort the experiment.
pub fn run_trials<T, F>(ds: &PartitionedDataset, cfg: &ExperimentConfig, body: F) -> Result<Vec<TrialOutcome<T>>>
where
    T: Send,
    F: Fn(&PartitionedDataset, &ExperimentConfig, Deadline) -> Result<T> + Sync,
{
    cfg.validate()?;
    let run_one = |trial: usize| -> Result<TrialOutcome<T>> {
        let seed = trial_seed(cfg.seed, trial);
        let started = Instant::now();
        let deadline = Deadline::after(cfg.time_limit());
        let trial_cfg = ExperimentConfig {
            seed,
            ..cfg.clone()
        };
        let result = split(ds, cfg.split, seed::derive(seed, &[0])).and_then(|part| body(&part, &trial_cfg, deadline));
        let wall_seconds = started.elapsed().as_secs_f64();
        match result {
            Ok(v) => Ok(TrialOutcome {
                trial,
                seed,
                status: TrialStatus::Completed,
                value: Some(v),
                wall_seconds,
            }),
            Err(Error::TimeLimitExceeded) => {
                log::warn!("trial {trial} exceeded the time limit");
                Ok(TrialOutcome {
                    trial,
                    seed,
                    status: TrialStatus::TimedOut,
                    value: None,
                    wall_seconds,
                })
            }
            Err(e) => Err(e),
        }
    };
    pool(cfg.workers)?.install(|| (0..cfg.trials).into_par_iter().map(run_one).collect())
}

/// Selection followed by evaluation, once per trial.
pub fn run_experiment_on(ds: &PartitionedDataset, cfg: &ExperimentConfig) -> Result<SelectionReport> {
    let outcomes = run_trials(ds, cfg, |part, c, deadline| {
        let sel = sewil_select_with_deadline(part, c, deadline)?;
        let acc = evaluate_selection_with_deadline(part, &sel.subset, &evaluation_forest(c), c.sla, deadline)?;
        Ok((sel, acc))
    })?;
    let trials = outcomes
        .into_iter()
        .map(|o| match o.value {
            Some((sel, acc)) => TrialRecord::completed(o.trial, o.seed, &sel, acc, o.wall_seconds),
            None => TrialRecord::timed_out(o.trial, o.seed, o.wall_seconds),
        })
        .collect();
    Ok(SelectionReport::new(ds.content_hash(), cfg, trials))
}

/// [`run_experiment_on`] with the dataset named in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SelectionReport> {
    let ds = load_configured(cfg)?;
    run_experiment_on(&ds, cfg)
}

pub fn load_configured(cfg: &ExperimentConfig) -> Result<PartitionedDataset> {
    cfg.dataset
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset configured".into()))?
        .load()
}

/// Criterion comparison once per trial.
pub fn compare_criteria_on(
    ds: &PartitionedDataset,
    cfg: &ExperimentConfig,
    corruption: Option<f64>,
) -> Result<CriteriaReport> {
    let outcomes = run_trials(ds, cfg, |part, c, deadline| {
        criterion_comparison_with_deadline(part, c, corruption, deadline)
    })?;
    let trials = outcomes
        .into_iter()
        .map(|o: TrialOutcome<CriterionComparison>| CriteriaTrial {
            trial: o.trial,
            seed: o.seed,
            status: o.status,
            comparison: o.value,
            wall_seconds: o.wall_seconds,
        })
        .collect();
    Ok(CriteriaReport::new(ds.content_hash(), cfg, corruption, trials))
}

/// The same trials run once with each search scheme.
pub fn compare_search_on(ds: &PartitionedDataset, cfg: &ExperimentConfig) -> Result<SearchReport> {
    let with = |scheme| {
        let mut c = cfg.clone();
        c.ga.scheme = scheme;
        run_experiment_on(ds, &c)
    };
    SearchReport::new(with(Scheme::Cga)?, with(Scheme::Fsga)?)
}

/// End-to-end accuracy of a fixed subset, once per trial.
pub fn evaluate_subset_on(
    ds: &PartitionedDataset,
    subset: &crate::dataset::FeatureSubset,
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport> {
    let outcomes = run_trials(ds, cfg, |part, c, deadline| {
        evaluate_selection_with_deadline(part, subset, &evaluation_forest(c), c.sla, deadline)
    })?;
    let trials = outcomes
        .into_iter()
        .map(|o| EvaluationTrial {
            trial: o.trial,
            seed: o.seed,
            status: o.status,
            acc_u: o.value.and_then(|a| a.acc_u),
            acc_t: o.value.and_then(|a| a.acc_t),
            wall_seconds: o.wall_seconds,
        })
        .collect();
    Ok(EvaluationReport::new(ds.content_hash(), cfg.seed, subset.indices().to_vec(), trials))
}
