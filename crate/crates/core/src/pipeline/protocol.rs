//! Selection, evaluation and comparison protocols on one split dataset.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::context::{estimate_label_noise, Criterion, EvaluationContext, SubsetScores};
use crate::bounds::MislabelingMatrix;
use crate::budget::Deadline;
use crate::dataset::{project, FeatureSubset, Partition, PartitionedDataset};
use crate::error::Result;
use crate::forest::ForestConfig;
use crate::genetic::{self, initial_length, GaConfig, GenerationTrace, Scheme};
use crate::selflearn::{sla_with_deadline, AugmentedSet, SlaConfig};
use crate::seed;

// sub-stream tags under a run seed
const SLA_STREAM: u64 = 1;
const GAMMA_STREAM: u64 = 2;
const GA_STREAM: u64 = 3;
const FINAL_SCORE_STREAM: u64 = 4;
const EVAL_STREAM: u64 = 5;
const CORRUPT_STREAM: u64 = 6;
const SAMPLE_STREAM: u64 = 7;
const CANDIDATE_STREAM: u64 = 8;

/// Result of one semi-supervised wrapper selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub subset: FeatureSubset,
    pub scheme: Scheme,
    pub criterion: Criterion,
    pub mislabeling: MislabelingMatrix,
    pub beta: f64,
    pub gamma: f64,
    pub sla_rounds: usize,
    pub pseudo_labels: usize,
    pub coverage: f64,
    /// agreement of pseudo-labels with hidden truth
    pub pseudo_accuracy: Option<f64>,
    /// criteria of the returned subset
    pub scores: SubsetScores,
    pub generations: Vec<GenerationTrace>,
    pub removed: Vec<usize>,
}

/// Augmented set, label-noise estimate and scoring context of a run.
pub struct Prepared {
    pub augmented: AugmentedSet,
    pub mislabeling: MislabelingMatrix,
    pub context: EvaluationContext,
}

/// Self-learning on all features, then the mislabeling estimate from a
/// labeled-only forest.
pub fn prepare(ds: &PartitionedDataset, cfg: &ExperimentConfig, deadline: Deadline) -> Result<Prepared> {
    let s = cfg.seed;
    let (augmented, _) = sla_with_deadline(ds, &cfg.forest.with_seed(seed::derive(s, &[SLA_STREAM])), cfg.sla, deadline)?;
    deadline.check()?;
    let mislabeling = estimate_label_noise(ds, &cfg.forest.with_seed(seed::derive(s, &[GAMMA_STREAM])))?;
    let context = EvaluationContext::with_modes(
        &augmented,
        &cfg.forest,
        cfg.criterion,
        mislabeling.gamma(),
        cfg.gamma_mode,
        cfg.vote_pool,
        cfg.training_pool,
    )?;
    log::info!(
        "augmented set: {} pseudo-labels over {} rounds, gamma {:.4}",
        augmented.pseudo_labels().len(),
        augmented.rounds(),
        mislabeling.gamma()
    );
    Ok(Prepared {
        augmented,
        mislabeling,
        context,
    })
}

/// Full selection: self-learning, mislabeling estimate, then the genetic
/// search scored by `cfg.criterion`. `cfg.seed` keys every random stream.
pub fn sewil_select(ds: &PartitionedDataset, cfg: &ExperimentConfig) -> Result<SelectionOutcome> {
    sewil_select_with_deadline(ds, cfg, Deadline::none())
}

pub fn sewil_select_with_deadline(
    ds: &PartitionedDataset,
    cfg: &ExperimentConfig,
    deadline: Deadline,
) -> Result<SelectionOutcome> {
    let p = prepare(ds, cfg, deadline)?;
    let ga = GaConfig {
        seed: seed::derive(cfg.seed, &[GA_STREAM]),
        ..cfg.ga.clone()
    };
    let out = genetic::run_with_deadline(&p.context, &ga, deadline)?;
    let scores = p.context.scores(&out.subset, seed::derive(cfg.seed, &[FINAL_SCORE_STREAM]))?;
    Ok(SelectionOutcome {
        subset: out.subset,
        scheme: ga.scheme,
        criterion: cfg.criterion,
        beta: p.mislabeling.beta(),
        gamma: p.mislabeling.gamma(),
        mislabeling: p.mislabeling,
        sla_rounds: p.augmented.rounds(),
        pseudo_labels: p.augmented.pseudo_labels().len(),
        coverage: p.augmented.coverage(),
        pseudo_accuracy: p.augmented.pseudo_label_accuracy(),
        scores,
        generations: out.trace,
        removed: out.removed.features(),
    })
}

/// Accuracy of self-learning retrained on the selected features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionAccuracy {
    /// on the unlabeled training rows, against their hidden labels
    pub acc_u: Option<f64>,
    /// on the test rows
    pub acc_t: Option<f64>,
}

pub fn evaluate_selection(
    ds: &PartitionedDataset,
    subset: &FeatureSubset,
    fcfg: &ForestConfig,
    sla: SlaConfig,
) -> Result<SelectionAccuracy> {
    evaluate_selection_with_deadline(ds, subset, fcfg, sla, Deadline::none())
}

pub fn evaluate_selection_with_deadline(
    ds: &PartitionedDataset,
    subset: &FeatureSubset,
    fcfg: &ForestConfig,
    sla: SlaConfig,
    deadline: Deadline,
) -> Result<SelectionAccuracy> {
    let projected = project(ds, subset)?;
    let (_, forest) = sla_with_deadline(&projected, fcfg, sla, deadline)?;
    let accuracy = |part: Partition| -> Result<Option<f64>> {
        let rows = projected.indices(part);
        if rows.is_empty() {
            return Ok(None);
        }
        let pred = forest.predict(&projected.features().select_rows(&rows))?;
        let right = rows.iter().zip(&pred).filter(|(&i, &p)| projected.truth()[i] == p).count();
        Ok(Some(right as f64 / rows.len() as f64))
    };
    Ok(SelectionAccuracy {
        acc_u: accuracy(Partition::Unlabeled)?,
        acc_t: accuracy(Partition::Test)?,
    })
}

/// Evaluation seed used for the selected subset of a run.
pub fn evaluation_forest(cfg: &ExperimentConfig) -> ForestConfig {
    cfg.forest.with_seed(seed::derive(cfg.seed, &[EVAL_STREAM]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub subset: FeatureSubset,
    pub oob: f64,
    pub cb: f64,
    pub cbil: f64,
    pub acc_u: Option<f64>,
}

impl CandidateRecord {
    pub fn value(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Oob => self.oob,
            Criterion::Cb => self.cb,
            Criterion::Cbil => self.cbil,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionPick {
    pub criterion: Criterion,
    /// position in the candidate pool
    pub index: usize,
    pub value: f64,
    pub acc_u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionComparison {
    pub gamma: f64,
    pub corruption: Option<f64>,
    pub picks: Vec<CriterionPick>,
    /// best ACC-U over the whole pool; `None` when skipped
    pub gt: Option<f64>,
    pub candidates: Vec<CandidateRecord>,
}

impl CriterionComparison {
    pub fn pick(&self, c: Criterion) -> Option<&CriterionPick> {
        self.picks.iter().find(|p| p.criterion == c)
    }
}

/// Score a pool of random subsets with every criterion and compare the
/// accuracy of each criterion's choice with the best choice in the pool.
///
/// `corruption` replaces that fraction of pseudo-labels with wrong classes
/// before scoring, to stress the criteria with noisier labels. End-to-end
/// accuracy runs once per pool member unless `cfg.skip_gt` is set, in which
/// case only the picks are evaluated.
pub fn criterion_comparison(
    ds: &PartitionedDataset,
    cfg: &ExperimentConfig,
    corruption: Option<f64>,
) -> Result<CriterionComparison> {
    criterion_comparison_with_deadline(ds, cfg, corruption, Deadline::none())
}

pub fn criterion_comparison_with_deadline(
    ds: &PartitionedDataset,
    cfg: &ExperimentConfig,
    corruption: Option<f64>,
    deadline: Deadline,
) -> Result<CriterionComparison> {
    let s = cfg.seed;
    let mut p = prepare(ds, cfg, deadline)?;
    if let Some(rate) = corruption {
        let noisy = p.augmented.corrupt_pseudo_labels(rate, seed::derive(s, &[CORRUPT_STREAM]));
        p.context = EvaluationContext::with_modes(
            &noisy,
            &cfg.forest,
            cfg.criterion,
            p.mislabeling.gamma(),
            cfg.gamma_mode,
            cfg.vote_pool,
            cfg.training_pool,
        )?;
        p.augmented = noisy;
    }

    let d = ds.dimension();
    let len = initial_length(d);
    let mut rng = seed::rng_for(s, &[SAMPLE_STREAM]);
    let pool: Vec<FeatureSubset> = (0..cfg.comparison_subsets)
        .map(|_| FeatureSubset::new(sample(&mut rng, d, len).into_vec(), d))
        .collect::<Result<_>>()?;

    let scored: Vec<SubsetScores> = pool
        .par_iter()
        .enumerate()
        .map(|(i, sub)| {
            deadline.check()?;
            p.context.scores(sub, seed::derive(s, &[CANDIDATE_STREAM, i as u64]))
        })
        .collect::<Result<_>>()?;

    let mut candidates: Vec<CandidateRecord> = pool
        .into_iter()
        .zip(&scored)
        .map(|(subset, sc)| CandidateRecord {
            subset,
            oob: sc.oob_error,
            cb: sc.cbound.value,
            cbil: sc.cbound_il.value,
            acc_u: None,
        })
        .collect();

    let argmin = |c: Criterion| {
        (0..candidates.len())
            .min_by(|&a, &b| candidates[a].value(c).total_cmp(&candidates[b].value(c)).then(a.cmp(&b)))
            .unwrap_or(0)
    };
    let chosen: Vec<(Criterion, usize)> = Criterion::ALL.iter().map(|&c| (c, argmin(c))).collect();

    let to_evaluate: Vec<usize> = if cfg.skip_gt {
        let mut v: Vec<usize> = chosen.iter().map(|&(_, i)| i).collect();
        v.sort_unstable();
        v.dedup();
        v
    } else {
        (0..candidates.len()).collect()
    };
    let accs: Vec<(usize, Option<f64>)> = to_evaluate
        .par_iter()
        .map(|&i| {
            deadline.check()?;
            let fcfg = cfg.forest.with_seed(seed::derive(s, &[EVAL_STREAM, i as u64]));
            let acc = evaluate_selection_with_deadline(ds, &candidates[i].subset, &fcfg, cfg.sla, deadline)?;
            Ok((i, acc.acc_u))
        })
        .collect::<Result<_>>()?;
    for (i, a) in accs {
        candidates[i].acc_u = a;
    }

    let gt = if cfg.skip_gt {
        None
    } else {
        candidates.iter().filter_map(|c| c.acc_u).max_by(f64::total_cmp)
    };
    let picks = chosen
        .into_iter()
        .map(|(criterion, index)| CriterionPick {
            criterion,
            index,
            value: candidates[index].value(criterion),
            acc_u: candidates[index].acc_u,
        })
        .collect();
    Ok(CriterionComparison {
        gamma: p.mislabeling.gamma(),
        corruption,
        picks,
        gt,
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub selection: SelectionOutcome,
    pub accuracy: SelectionAccuracy,
}

/// Run the selection with each scheme on the same split and seed.
pub fn compare_search(ds: &PartitionedDataset, cfg: &ExperimentConfig) -> Result<Vec<SearchResult>> {
    [Scheme::Cga, Scheme::Fsga]
        .into_iter()
        .map(|scheme| {
            let mut c = cfg.clone();
            c.ga.scheme = scheme;
            let selection = sewil_select(ds, &c)?;
            let accuracy = evaluate_selection(ds, &selection.subset, &evaluation_forest(&c), c.sla)?;
            Ok(SearchResult { selection, accuracy })
        })
        .collect()
}
