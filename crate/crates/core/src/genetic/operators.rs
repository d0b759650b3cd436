use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng as _;

use super::{Candidate, GaConfig, RemovedSet};
use crate::dataset::FeatureSubset;
use crate::error::{Error, Result};
use crate::seed::Rng;

/// `population` random subsets of size `floor(sqrt(d))` (at least 1).
pub fn init_population(d: usize, cfg: &GaConfig, rng: &mut Rng) -> Result<Vec<Candidate>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let len = initial_length(d);
    (0..cfg.population)
        .map(|_| {
            let idx = sample(rng, d, len).into_vec();
            Ok(Candidate::new(FeatureSubset::new(idx, d)?))
        })
        .collect()
}

/// `population` random membership vectors with every gene set with
/// probability 1/2 (redrawn when empty).
pub fn init_population_bits(d: usize, cfg: &GaConfig, rng: &mut Rng) -> Result<Vec<Candidate>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    (0..cfg.population)
        .map(|_| loop {
            let idx: Vec<usize> = (0..d).filter(|_| rng.random::<bool>()).collect();
            if !idx.is_empty() {
                return Ok(Candidate::new(FeatureSubset::new(idx, d)?));
            }
        })
        .collect()
}

pub fn initial_length(d: usize) -> usize {
    ((d as f64).sqrt().floor() as usize).clamp(1, d.max(1))
}

/// Lowest fitness first; ties by smaller subset, then lexicographic subset.
/// Unevaluated candidates sort last.
pub fn rank(pop: &[Candidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = pop[a].fitness.unwrap_or(f64::INFINITY);
        let fb = pop[b].fitness.unwrap_or(f64::INFINITY);
        fa.total_cmp(&fb)
            .then(pop[a].subset.len().cmp(&pop[b].subset.len()))
            .then(pop[a].subset.cmp(&pop[b].subset))
    });
    order
}

/// The `p` best candidates (see [`rank`]).
pub fn select_parents(pop: &[Candidate], p: usize) -> Vec<Candidate> {
    rank(pop).into_iter().take(p).map(|i| pop[i].clone()).collect()
}

/// Subset members sorted by decreasing weight (ties: smaller index first).
pub fn by_weight(c: &Candidate) -> Vec<usize> {
    let mut order: Vec<(usize, f64)> = c
        .subset
        .indices()
        .iter()
        .enumerate()
        .map(|(pos, &f)| (f, c.weights.get(pos).copied().unwrap_or(0.0)))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().map(|(f, _)| f).collect()
}

fn live_outside(d: usize, removed: &RemovedSet, taken: &BTreeSet<usize>) -> Vec<usize> {
    (0..d)
        .filter(|f| !removed.contains(*f) && !taken.contains(f))
        .collect()
}

/// Weight-aware crossover with an explicit crossover point `k`: the child
/// takes `a`'s `k` heaviest features, then `b`'s features by decreasing
/// weight (skipping duplicates), then the rest of `a`'s, and finally random
/// live features until it has `child_len` members.
pub fn crossover_weighted_at(
    a: &Candidate,
    b: &Candidate,
    child_len: usize,
    k: usize,
    d: usize,
    removed: &RemovedSet,
    rng: &mut Rng,
) -> Result<FeatureSubset> {
    if child_len == 0 {
        return Err(Error::InvalidArgument("child length must be >= 1".into()));
    }
    let available = d - removed.len_within(d);
    if child_len > available {
        return Err(Error::NotEnoughFeatures {
            requested: child_len,
            available,
        });
    }
    let sorted_a = by_weight(a);
    let sorted_b = by_weight(b);
    let k = k.min(child_len);
    let mut child: BTreeSet<usize> = BTreeSet::new();
    let candidates = sorted_a[..k.min(sorted_a.len())]
        .iter()
        .chain(&sorted_b)
        .chain(&sorted_a[k.min(sorted_a.len())..]);
    for &f in candidates {
        if child.len() == child_len {
            break;
        }
        if !removed.contains(f) {
            child.insert(f);
        }
    }
    if child.len() < child_len {
        let pool = live_outside(d, removed, &child);
        let need = child_len - child.len();
        for i in sample(rng, pool.len(), need) {
            child.insert(pool[i]);
        }
    }
    FeatureSubset::new(child.into_iter().collect(), d)
}

/// Weight-aware crossover with the point drawn uniformly from `0..=child_len`.
pub fn crossover_weighted(
    a: &Candidate,
    b: &Candidate,
    child_len: usize,
    d: usize,
    removed: &RemovedSet,
    rng: &mut Rng,
) -> Result<FeatureSubset> {
    let k = rng.random_range(0..=child_len);
    crossover_weighted_at(a, b, child_len, k, d, removed, rng)
}

pub fn to_bits(s: &FeatureSubset, d: usize) -> Vec<bool> {
    let mut bits = vec![false; d];
    s.indices().iter().for_each(|&f| bits[f] = true);
    bits
}

fn from_bits(bits: &[bool]) -> Vec<usize> {
    (0..bits.len()).filter(|&i| bits[i]).collect()
}

/// Single-point crossover on membership vectors: genes before `cut` come from
/// `b`, the rest from `a`. `cut = 0` reproduces `a`, `cut = d` reproduces `b`.
pub fn crossover_uniform_at(a: &FeatureSubset, b: &FeatureSubset, d: usize, cut: usize) -> Vec<bool> {
    let (ba, bb) = (to_bits(a, d), to_bits(b, d));
    let cut = cut.min(d);
    bb[..cut].iter().chain(&ba[cut..]).copied().collect()
}

/// Classic crossover at a uniform cut in `0..=d`; an empty child triggers a redraw.
pub fn crossover_uniform(a: &FeatureSubset, b: &FeatureSubset, d: usize, rng: &mut Rng) -> Result<FeatureSubset> {
    loop {
        let cut = rng.random_range(0..=d);
        let bits = crossover_uniform_at(a, b, d, cut);
        if bits.iter().any(|&x| x) {
            return FeatureSubset::new(from_bits(&bits), d);
        }
    }
}

/// Classic bit-flip mutation over the whole membership vector. A flip pattern
/// that would empty the subset is discarded.
pub fn mutate_bits(s: &FeatureSubset, d: usize, rate: f64, rng: &mut Rng) -> FeatureSubset {
    let mut bits = to_bits(s, d);
    for b in bits.iter_mut() {
        if rng.random::<f64>() < rate {
            *b = !*b;
        }
    }
    let idx = from_bits(&bits);
    if idx.is_empty() {
        return s.clone();
    }
    FeatureSubset::new(idx, d).unwrap_or_else(|_| s.clone())
}

/// Swap mutation followed by length mutation. Each member is replaced, with
/// probability `mutation_rate`, by a random live non-member; then the length
/// changes by -1 / 0 / +1 according to `cfg.length_mutation`. Never empty,
/// never contains a removed feature.
pub fn mutate(s: &FeatureSubset, d: usize, removed: &RemovedSet, cfg: &GaConfig, rng: &mut Rng) -> FeatureSubset {
    let mut members: BTreeSet<usize> = s.indices().iter().copied().filter(|&f| !removed.contains(f)).collect();
    if members.is_empty() {
        members.insert(s.indices()[0]);
    }
    let originals: Vec<usize> = members.iter().copied().collect();
    for f in originals {
        if rng.random::<f64>() < cfg.mutation_rate {
            let pool = live_outside(d, removed, &members);
            if !pool.is_empty() {
                let replacement = pool[rng.random_range(0..pool.len())];
                members.remove(&f);
                members.insert(replacement);
            }
        }
    }
    let [down, keep, _] = cfg.length_mutation;
    let u: f64 = rng.random();
    if u < down {
        if members.len() > 1 {
            let victim = *members.iter().nth(rng.random_range(0..members.len())).unwrap_or(&0);
            members.remove(&victim);
        }
    } else if u >= down + keep {
        let pool = live_outside(d, removed, &members);
        if !pool.is_empty() {
            members.insert(pool[rng.random_range(0..pool.len())]);
        }
    }
    FeatureSubset::new(members.into_iter().collect(), d).unwrap_or_else(|_| s.clone())
}

/// Features present in at least `fraction * |pop|` candidates; falls back to
/// the best candidate when the vote keeps nothing.
pub fn combine_final(pop: &[Candidate], fraction: f64, d: usize) -> Result<FeatureSubset> {
    if pop.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    let mut votes = vec![0usize; d];
    for c in pop {
        for &f in c.subset.indices() {
            votes[f] += 1;
        }
    }
    let need = fraction * pop.len() as f64;
    let kept: Vec<usize> = (0..d).filter(|&f| votes[f] > 0 && votes[f] as f64 >= need).collect();
    if kept.is_empty() {
        let best = rank(pop)[0];
        return Ok(pop[best].subset.clone());
    }
    FeatureSubset::new(kept, d)
}
