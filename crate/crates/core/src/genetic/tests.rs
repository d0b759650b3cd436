use super::*;
use crate::dataset::FeatureSubset;
use crate::seed;

fn cand(subset: &[usize], weights: &[f64], fitness: f64, d: usize) -> Candidate {
    Candidate::evaluated(FeatureSubset::new(subset.to_vec(), d).unwrap(), fitness, weights.to_vec())
}

/// Features below `informative` carry signal; the rest are noise.
struct Toy {
    d: usize,
    informative: usize,
}

impl SubsetEvaluator for Toy {
    fn dimension(&self) -> usize {
        self.d
    }

    fn evaluate(&self, subset: &FeatureSubset, _seed: u64) -> Result<Evaluation> {
        let hits = subset.indices().iter().filter(|&&f| f < self.informative).count();
        let fitness = 1.0 - hits as f64 / self.informative as f64 + 0.001 * subset.len() as f64;
        let weights = subset
            .indices()
            .iter()
            .map(|&f| if f < self.informative { 1.0 } else { 0.01 })
            .collect();
        Ok(Evaluation { fitness, weights })
    }

    fn shadow_weights(&self, _base: &[usize], suspicious: &[usize], _seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        let real = suspicious
            .iter()
            .map(|&f| if f < self.informative { 0.2 } else { 0.01 })
            .collect();
        Ok((real, vec![0.01; suspicious.len()]))
    }
}

#[test]
fn init_sizes() {
    let cfg = GaConfig::default();
    let mut rng = seed::rng(1);
    for (d, len) in [(500, 22), (4, 2), (1, 1)] {
        let pop = init_population(d, &cfg, &mut rng).unwrap();
        assert_eq!(pop.len(), 40);
        assert!(pop.iter().all(|c| c.subset.len() == len));
    }
    assert!(init_population(0, &cfg, &mut rng).is_err());
}

#[test]
fn bit_init_density() {
    let cfg = GaConfig { population: 200, ..Default::default() };
    let mut rng = seed::rng(4);
    let pop = init_population_bits(100, &cfg, &mut rng).unwrap();
    let mean = pop.iter().map(|c| c.subset.len()).sum::<usize>() as f64 / 200.0;
    assert!((mean - 50.0).abs() < 2.0, "{mean}");
    let tiny = init_population_bits(1, &cfg, &mut rng).unwrap();
    assert!(tiny.iter().all(|c| c.subset.indices() == [0]));
}

#[test]
fn parent_selection() {
    let d = 5;
    let pop = vec![cand(&[0], &[1.0], 0.3, d), cand(&[1], &[1.0], 0.1, d), cand(&[2], &[1.0], 0.2, d)];
    let p = select_parents(&pop, 2);
    assert_eq!(p, vec![pop[1].clone(), pop[2].clone()]);
    assert_eq!(select_parents(&pop, 3).len(), 3);

    let tied = vec![
        cand(&[0, 1, 2], &[0.3, 0.3, 0.4], 0.5, d),
        cand(&[3], &[1.0], 0.5, d),
        cand(&[1, 4], &[0.5, 0.5], 0.5, d),
        cand(&[1, 2], &[0.5, 0.5], 0.5, d),
    ];
    let p = select_parents(&tied, 2);
    assert_eq!(p[0].subset.indices(), &[3]);
    assert_eq!(p[1].subset.indices(), &[1, 2]);
}

#[test]
fn weighted_crossover_trace() {
    // a sorted [3, 1, 7], b sorted [2, 3, 5]
    let d = 10;
    let a = cand(&[1, 3, 7], &[0.3, 0.5, 0.2], 0.0, d);
    let b = cand(&[2, 3, 5], &[0.5, 0.3, 0.2], 0.0, d);
    let removed = RemovedSet::default();
    let mut rng = seed::rng(0);
    let child = crossover_weighted_at(&a, &b, 3, 2, d, &removed, &mut rng).unwrap();
    assert_eq!(child.indices(), &[1, 2, 3]);
    let child = crossover_weighted_at(&a, &b, 3, 0, d, &removed, &mut rng).unwrap();
    assert_eq!(child.indices(), &[2, 3, 5]);
    for k in 0..=2 {
        let child = crossover_weighted_at(&a, &a, 2, k, d, &removed, &mut rng).unwrap();
        assert_eq!(child.indices(), &[1, 3]);
    }
}

#[test]
fn weighted_crossover_fills_and_respects_removed() {
    let d = 8;
    let a = cand(&[0, 1], &[0.5, 0.5], 0.0, d);
    let b = cand(&[1, 2], &[0.5, 0.5], 0.0, d);
    let mut removed = RemovedSet::default();
    let ev = Removal { generation: 0, mean_weight: 0.0, weight: 0.0, shadow_weight: 0.0 };
    removed.insert(2, ev);
    removed.insert(5, ev);
    let mut rng = seed::rng(3);
    for _ in 0..50 {
        let len = rng.random_range(1..=6);
        let child = crossover_weighted(&a, &b, len, d, &removed, &mut rng).unwrap();
        assert_eq!(child.len(), len);
        assert!(!child.contains(2) && !child.contains(5));
    }
    assert!(crossover_weighted(&a, &b, 7, d, &removed, &mut rng).is_err());
}

#[test]
fn uniform_crossover_figure_vectors() {
    let d = 8;
    let bits = |v: &[u8]| FeatureSubset::new((0..d).filter(|&i| v[i] == 1).collect(), d).unwrap();
    let p1 = bits(&[0, 0, 1, 0, 1, 1, 0, 1]);
    let p2 = bits(&[1, 1, 1, 0, 0, 1, 0, 0]);
    let as_u8 = |b: Vec<bool>| b.into_iter().map(u8::from).collect::<Vec<_>>();
    assert_eq!(as_u8(crossover_uniform_at(&p1, &p2, d, 1)), vec![1, 0, 1, 0, 1, 1, 0, 1]);
    assert_eq!(crossover_uniform_at(&p1, &p2, d, 0), to_bits(&p1, d));
    assert_eq!(crossover_uniform_at(&p1, &p2, d, d), to_bits(&p2, d));
}

#[test]
fn mutation_identity_and_guard() {
    let d = 10;
    let removed = RemovedSet::default();
    let cfg = GaConfig { mutation_rate: 0.0, length_mutation: [0.0, 1.0, 0.0], ..Default::default() };
    let s = FeatureSubset::new(vec![1, 4, 6], d).unwrap();
    let mut rng = seed::rng(9);
    assert_eq!(mutate(&s, d, &removed, &cfg, &mut rng), s);

    let shrink = GaConfig { mutation_rate: 0.0, length_mutation: [1.0, 0.0, 0.0], ..Default::default() };
    let one = FeatureSubset::new(vec![3], d).unwrap();
    assert_eq!(mutate(&one, d, &removed, &shrink, &mut rng), one);
}

#[test]
fn mutation_swap_rate() {
    let d = 200;
    let removed = RemovedSet::default();
    let cfg = GaConfig { mutation_rate: 0.05, length_mutation: [0.0, 1.0, 0.0], ..Default::default() };
    let s = FeatureSubset::new((0..10).collect(), d).unwrap();
    let mut rng = seed::rng(11);
    let trials = 10_000;
    let mut swapped = 0usize;
    for _ in 0..trials {
        let m = mutate(&s, d, &removed, &cfg, &mut rng);
        assert_eq!(m.len(), 10);
        swapped += s.indices().iter().filter(|&&f| !m.contains(f)).count();
    }
    let rate = swapped as f64 / (trials * 10) as f64;
    assert!((rate - 0.05).abs() <= 0.01, "rate {rate}");
}

#[test]
fn mutation_avoids_removed() {
    let d = 6;
    let mut removed = RemovedSet::default();
    let ev = Removal { generation: 0, mean_weight: 0.0, weight: 0.0, shadow_weight: 0.0 };
    for f in [0, 2, 4] {
        removed.insert(f, ev);
    }
    let cfg = GaConfig { mutation_rate: 0.5, length_mutation: [0.3, 0.3, 0.4], ..Default::default() };
    let s = FeatureSubset::new(vec![1, 3], d).unwrap();
    let mut rng = seed::rng(2);
    for _ in 0..500 {
        let m = mutate(&s, d, &removed, &cfg, &mut rng);
        assert!(!m.indices().is_empty());
        assert!(m.indices().iter().all(|&f| !removed.contains(f)));
    }
}

#[test]
fn combine_votes() {
    let d = 6;
    let same = vec![cand(&[1, 2], &[0.5, 0.5], 0.1, d); 3];
    assert_eq!(combine_final(&same, 0.5, d).unwrap().indices(), &[1, 2]);

    let pop = vec![
        cand(&[0, 1], &[0.5, 0.5], 0.1, d),
        cand(&[0, 2], &[0.5, 0.5], 0.2, d),
        cand(&[3], &[1.0], 0.3, d),
        cand(&[4], &[1.0], 0.4, d),
    ];
    assert_eq!(combine_final(&pop, 0.5, d).unwrap().indices(), &[0]);
    assert_eq!(combine_final(&pop, 0.0, d).unwrap().indices(), &[0, 1, 2, 3, 4]);
    // nothing reaches 100%: fall back to the best
    assert_eq!(combine_final(&pop, 1.0, d).unwrap().indices(), &[0, 1]);
}

#[test]
fn average_weight_formula() {
    let d = 4;
    let pop = vec![cand(&[0, 1], &[0.75, 0.25], 0.0, d), cand(&[1, 2], &[0.5, 0.5], 0.0, d)];
    let w = average_weights(&pop, d);
    assert_eq!(w, vec![Some(0.375), Some(0.375), Some(0.25), None]);
}

#[test]
fn filter_removes_noise_only() {
    let toy = Toy { d: 20, informative: 4 };
    let pop = vec![
        cand(&[0, 10], &[0.9, 0.1], 0.5, 20),
        cand(&[1, 11, 12], &[0.8, 0.1, 0.1], 0.6, 20),
        cand(&[2, 3, 13], &[0.1, 0.1, 0.8], 0.7, 20),
    ];
    let cfg = GaConfig { theta_out: Some(0.2), ..Default::default() };
    let removed = RemovedSet::default();
    let out = relevance_filter(&pop, &removed, &pop[0], &toy, &cfg, 0, 0).unwrap();
    let gone: Vec<usize> = out.iter().map(|(f, _)| *f).collect();
    // 2 and 3 are suspicious by weight but beat their shadows; 10 is protected by the best parent
    assert_eq!(gone, vec![11, 12]);
}

#[test]
fn degenerate_run_returns_initial() {
    let toy = Toy { d: 9, informative: 3 };
    let cfg = GaConfig {
        generations: 1,
        population: 1,
        parents: 1,
        mutation_rate: 0.0,
        scheme: Scheme::Cga,
        seed: 5,
        ..Default::default()
    };
    let mut rng = seed::rng_for(5, &[u64::MAX]);
    let initial = init_population_bits(9, &cfg, &mut rng).unwrap();
    let out = run(&toy, &cfg).unwrap();
    assert_eq!(out.subset, initial[0].subset);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn elitism_and_determinism() {
    let toy = Toy { d: 60, informative: 6 };
    for scheme in [Scheme::Cga, Scheme::Fsga] {
        let cfg = GaConfig { generations: 12, population: 16, parents: 4, scheme, seed: 21, ..Default::default() };
        let a = run(&toy, &cfg).unwrap();
        let b = run(&toy, &cfg).unwrap();
        assert_eq!(a, b);
        for w in a.trace.windows(2) {
            assert!(w[1].best_fitness <= w[0].best_fitness);
        }
        assert!(a.final_population.len() == 16);
        for c in &a.final_population {
            assert!(c.subset.indices().iter().all(|&f| !a.removed.contains(f)));
        }
    }
}

#[test]
fn fsga_recovers_toy_signal() {
    let toy = Toy { d: 100, informative: 10 };
    let cfg = GaConfig { generations: 20, population: 30, parents: 6, seed: 3, ..Default::default() };
    let out = run(&toy, &cfg).unwrap();
    let hits = out.subset.indices().iter().filter(|&&f| f < 10).count();
    assert!(hits >= 7, "{:?}", out.subset);
    assert!(out.subset.len() <= 30);
    assert!(out.removed.iter().all(|(&f, _)| f >= 10));
}

#[test]
fn config_validation() {
    assert!(GaConfig::default().validate().is_ok());
    assert!(GaConfig { parents: 41, ..Default::default() }.validate().is_err());
    assert!(GaConfig { length_mutation: [0.5, 0.5, 0.5], ..Default::default() }.validate().is_err());
    assert!(GaConfig { theta_out: Some(-1.0), ..Default::default() }.validate().is_err());
    assert_eq!("FSGA".parse::<Scheme>().unwrap(), Scheme::Fsga);
}
