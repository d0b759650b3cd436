//! Genetic search over feature subsets (lower fitness is better).
//!
//! Two schemes share the generation loop:
//!
//! - [`Scheme::Cga`]: random membership vectors (each feature present with
//!   probability 1/2), single-point crossover, bit-flip mutation; returns the
//!   best candidate of the last population.
//! - [`Scheme::Fsga`]: subsets start at `floor(sqrt(d))` features, children
//!   inherit parents' features in decreasing-weight order, lengths mutate by
//!   ±1, irrelevant features are removed for good by a shadow-feature test,
//!   and the result is a vote over the final population.
//!
//! The best `parents` candidates survive each generation unchanged, so the
//! best fitness never increases.

mod operators;
mod relevance;

pub use operators::{
    by_weight, combine_final, crossover_uniform, crossover_uniform_at, crossover_weighted,
    crossover_weighted_at, init_population, init_population_bits, initial_length, mutate, mutate_bits, rank,
    select_parents, to_bits,
};
pub use relevance::{average_weights, relevance_filter, Removal, RemovedSet};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::dataset::FeatureSubset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Cga,
    Fsga,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cga" => Ok(Self::Cga),
            "fsga" => Ok(Self::Fsga),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub generations: usize,
    pub population: usize,
    pub parents: usize,
    /// per-member swap probability (FSGA) or per-gene flip probability (CGA)
    pub mutation_rate: f64,
    /// probabilities of length change -1, 0, +1
    pub length_mutation: [f64; 3],
    /// suspicious-feature threshold on mean weight; `None` means `0.5 / d`
    pub theta_out: Option<f64>,
    /// a suspicious feature must beat its shadow by more than this to stay
    pub shadow_margin: f64,
    pub final_vote_fraction: f64,
    pub scheme: Scheme,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            generations: 20,
            population: 40,
            parents: 8,
            mutation_rate: 0.05,
            length_mutation: [0.2, 0.6, 0.2],
            theta_out: None,
            shadow_margin: 0.0,
            final_vote_fraction: 0.5,
            scheme: Scheme::Fsga,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 || self.population == 0 || self.parents == 0 {
            return Err(Error::Config("generations, population and parents must be >= 1".into()));
        }
        if self.parents > self.population {
            return Err(Error::Config("parents must not exceed population".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config("mutation_rate must lie in [0, 1]".into()));
        }
        let lm = self.length_mutation;
        if lm.iter().any(|p| *p < 0.0) || (lm.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("length_mutation must be a distribution".into()));
        }
        if self.theta_out.is_some_and(|t| t < 0.0) {
            return Err(Error::Config("theta_out must be >= 0".into()));
        }
        Ok(())
    }
}

/// A subset with its fitness and per-member weights (aligned with `subset`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub subset: FeatureSubset,
    pub fitness: Option<f64>,
    pub weights: Vec<f64>,
}

impl Candidate {
    pub fn new(subset: FeatureSubset) -> Self {
        Self {
            subset,
            fitness: None,
            weights: Vec::new(),
        }
    }

    pub fn evaluated(subset: FeatureSubset, fitness: f64, weights: Vec<f64>) -> Self {
        Self {
            subset,
            fitness: Some(fitness),
            weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    /// one weight per subset member, summing to 1
    pub weights: Vec<f64>,
}

/// Fitness and weight oracle for subsets of a fixed feature space.
pub trait SubsetEvaluator: Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, subset: &FeatureSubset, seed: u64) -> Result<Evaluation>;

    /// Fit a model on `base ∪ suspicious ∪ permuted copies of suspicious` and
    /// return the weights of the suspicious features and of their copies,
    /// both in the order of `suspicious`.
    fn shadow_weights(&self, base: &[usize], suspicious: &[usize], seed: u64) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// Score `c` (weights renormalized to sum to 1 over its members).
pub fn evaluate(c: &Candidate, evaluator: &dyn SubsetEvaluator, seed: u64) -> Result<Candidate> {
    let e = evaluator.evaluate(&c.subset, seed)?;
    let total: f64 = e.weights.iter().sum();
    let weights = if total > 0.0 {
        e.weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / c.subset.len() as f64; c.subset.len()]
    };
    Ok(Candidate::evaluated(c.subset.clone(), e.fitness, weights))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_size: usize,
    pub mean_size: f64,
    /// mean pairwise Jaccard distance between subsets
    pub diversity: f64,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub subset: FeatureSubset,
    pub trace: Vec<GenerationTrace>,
    pub removed: RemovedSet,
    pub final_population: Vec<Candidate>,
}

fn evaluate_pending(
    pop: &mut [Candidate],
    evaluator: &dyn SubsetEvaluator,
    base_seed: u64,
    path: &[u64],
) -> Result<()> {
    let results: Vec<Option<Result<Candidate>>> = pop
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            if c.fitness.is_some() {
                return None;
            }
            let mut p = path.to_vec();
            p.push(i as u64);
            Some(evaluate(c, evaluator, seed::derive(base_seed, &p)))
        })
        .collect();
    for (slot, r) in pop.iter_mut().zip(results) {
        if let Some(r) = r {
            *slot = r?;
        }
    }
    Ok(())
}

fn jaccard_diversity(pop: &[Candidate]) -> f64 {
    let n = pop.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let a = pop[i].subset.indices();
            let b = pop[j].subset.indices();
            let inter = a.iter().filter(|f| b.binary_search(f).is_ok()).count();
            let union = a.len() + b.len() - inter;
            total += 1.0 - inter as f64 / union as f64;
            pairs += 1;
        }
    }
    total / pairs as f64
}

fn record(pop: &[Candidate], generation: usize, removed: usize) -> GenerationTrace {
    let fits: Vec<f64> = pop.iter().filter_map(|c| c.fitness).collect();
    let best = rank(pop)[0];
    GenerationTrace {
        generation,
        best_fitness: pop[best].fitness.unwrap_or(f64::NAN),
        mean_fitness: fits.iter().sum::<f64>() / fits.len().max(1) as f64,
        best_size: pop[best].subset.len(),
        mean_size: pop.iter().map(|c| c.subset.len()).sum::<usize>() as f64 / pop.len() as f64,
        diversity: jaccard_diversity(pop),
        removed,
    }
}

/// Replace removed members of every candidate by random live non-members,
/// keeping each candidate's length where enough live features remain.
fn strip_removed(pop: &mut [Candidate], removed: &RemovedSet, d: usize, rng: &mut seed::Rng) -> Result<()> {
    for c in pop.iter_mut() {
        let dropped = c.subset.indices().iter().filter(|&&f| removed.contains(f)).count();
        if dropped == 0 {
            continue;
        }
        let mut kept: Vec<usize> = c.subset.indices().iter().copied().filter(|&f| !removed.contains(f)).collect();
        let pool: Vec<usize> = (0..d).filter(|&f| !removed.contains(f) && !c.subset.contains(f)).collect();
        let refill = dropped.min(pool.len());
        kept.extend(rand::seq::index::sample(rng, pool.len(), refill).into_iter().map(|i| pool[i]));
        if kept.is_empty() {
            return Err(Error::NotEnoughFeatures {
                requested: 1,
                available: 0,
            });
        }
        *c = Candidate::new(FeatureSubset::new(kept, d)?);
    }
    Ok(())
}

pub fn run(evaluator: &dyn SubsetEvaluator, cfg: &GaConfig) -> Result<GaOutcome> {
    run_with_deadline(evaluator, cfg, Deadline::none())
}

/// Full generation loop; see the module docs.
pub fn run_with_deadline(evaluator: &dyn SubsetEvaluator, cfg: &GaConfig, deadline: Deadline) -> Result<GaOutcome> {
    cfg.validate()?;
    let d = evaluator.dimension();
    // breeding stream; evaluations use their own path-derived seeds
    let mut rng = seed::rng_for(cfg.seed, &[u64::MAX]);
    let mut pop = match cfg.scheme {
        Scheme::Cga => init_population_bits(d, cfg, &mut rng)?,
        Scheme::Fsga => init_population(d, cfg, &mut rng)?,
    };
    let mut removed = RemovedSet::default();
    let mut trace = Vec::with_capacity(cfg.generations);

    for g in 0..cfg.generations {
        deadline.check()?;
        evaluate_pending(&mut pop, evaluator, cfg.seed, &[g as u64, 0])?;

        if cfg.scheme == Scheme::Fsga {
            let best = pop[rank(&pop)[0]].clone();
            let shadow_seed = seed::derive(cfg.seed, &[g as u64, 2]);
            let newly = relevance_filter(&pop, &removed, &best, evaluator, cfg, g, shadow_seed)?;
            if !newly.is_empty() {
                log::debug!("generation {g}: removing {:?}", newly.iter().map(|(f, _)| f).collect::<Vec<_>>());
                for (f, r) in newly {
                    removed.insert(f, r);
                }
                strip_removed(&mut pop, &removed, d, &mut rng)?;
                evaluate_pending(&mut pop, evaluator, cfg.seed, &[g as u64, 1])?;
            }
        }

        let t = record(&pop, g, removed.len());
        log::info!(
            "generation {g}: best {:.4} mean {:.4} size {} removed {}",
            t.best_fitness,
            t.mean_fitness,
            t.best_size,
            t.removed
        );
        trace.push(t);
        if g + 1 == cfg.generations {
            break;
        }

        let parents = select_parents(&pop, cfg.parents);
        let mut next = parents.clone();
        while next.len() < cfg.population {
            let i = rng.random_range(0..parents.len());
            let j = if parents.len() > 1 {
                let j = rng.random_range(0..parents.len() - 1);
                if j >= i {
                    j + 1
                } else {
                    j
                }
            } else {
                i
            };
            let (a, b) = (&parents[i], &parents[j]);
            let child = match cfg.scheme {
                Scheme::Cga => {
                    let c = crossover_uniform(&a.subset, &b.subset, d, &mut rng)?;
                    mutate_bits(&c, d, cfg.mutation_rate, &mut rng)
                }
                Scheme::Fsga => {
                    let len = if rng.random::<bool>() { a.subset.len() } else { b.subset.len() };
                    let available = d - removed.len();
                    let c = crossover_weighted(a, b, len.min(available), d, &removed, &mut rng)?;
                    mutate(&c, d, &removed, cfg, &mut rng)
                }
            };
            next.push(Candidate::new(child));
        }
        pop = next;
    }

    let subset = match cfg.scheme {
        Scheme::Cga => pop[rank(&pop)[0]].subset.clone(),
        Scheme::Fsga => combine_final(&pop, cfg.final_vote_fraction, d)?,
    };
    Ok(GaOutcome {
        subset,
        trace,
        removed,
        final_population: pop,
    })
}

#[cfg(test)]
mod tests;
