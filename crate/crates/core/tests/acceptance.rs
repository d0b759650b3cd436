//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads=1`.
//! Criterion 3 carries a clause that cannot hold for the stated formula; its
//! failing part lives in an ignored test (see `criterion_3_identity_gamma`).

use std::time::Instant;

use rand::Rng;

use sewil::bounds::{self, MislabelingMatrix};
use sewil::dataset::{
    generate_clusters, inject_label_noise, split, Matrix, Partition, PartitionedDataset, SplitRatios,
    SyntheticSpec,
};
use sewil::forest::{Forest, ForestConfig, VoteMatrix};
use sewil::genetic::{self, GaConfig, Scheme};
use sewil::pipeline::{
    self, criterion_comparison, evaluate_selection, evaluation_forest, sewil_select, Criterion, EvaluationContext,
    ExperimentConfig, GammaMode,
};
use sewil::selflearn::{sla, AugmentedSet, SlaConfig};
use sewil::seed;

fn verdict(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

// ---------- brute-force oracles ----------

fn random_simplex<R: Rng>(rng: &mut R, k: usize, peak: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    if peak > 0.0 {
        let i = rng.random_range(0..k);
        v[i] += peak * rng.random::<f64>();
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn random_column_stochastic<R: Rng>(rng: &mut R, k: usize, diag: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut col: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        col[j] += diag * rng.random::<f64>();
        let s: f64 = col.iter().sum();
        for i in 0..k {
            p[i][j] = col[i] / s;
        }
    }
    p
}

fn oracle_margin(v: &[f64], y: usize) -> f64 {
    let other = (0..v.len()).filter(|&c| c != y).map(|c| v[c]).fold(f64::NEG_INFINITY, f64::max);
    v[y] - other
}

/// `E_x E_{i ~ w(x)} M(x, i)^power` with uniform `x`.
fn oracle_moment(votes: &[Vec<f64>], weights: &[Vec<f64>], power: i32) -> f64 {
    let mut total = 0.0;
    for (v, w) in votes.iter().zip(weights) {
        for (i, &p) in w.iter().enumerate() {
            total += p * oracle_margin(v, i).powi(power);
        }
    }
    total / votes.len() as f64
}

fn oracle_cbound(mu1: f64, mu2: f64, factor: f64) -> f64 {
    1.0 - (mu1 * mu1 / mu2) / factor
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

fn vm(rows: &[Vec<f64>]) -> VoteMatrix {
    VoteMatrix::from_rows(rows.to_vec()).unwrap()
}

// ---------- criterion 1 ----------

#[test]
fn criterion_1_bound_validity() {
    let started = Instant::now();
    let mut rng = seed::rng(101);
    let instances = 2000;
    let (mut thm1_checked, mut prop_checked) = (0usize, 0usize);
    let mut violations = Vec::new();
    let eps = 1e-12;
    for inst in 0..instances {
        let k = rng.random_range(2..=4);
        let n = rng.random_range(1..=6);
        let peak = [0.0, 1.0, 4.0][inst % 3];
        let votes: Vec<Vec<f64>> = (0..n).map(|_| random_simplex(&mut rng, k, peak)).collect();
        // posteriors lean towards the vote so that mu1 > 0 is common
        let posterior: Vec<Vec<f64>> = votes
            .iter()
            .map(|v| {
                let r = random_simplex(&mut rng, k, peak);
                let a = rng.random::<f64>();
                v.iter().zip(&r).map(|(x, y)| a * x + (1.0 - a) * y).collect()
            })
            .collect();
        let p = random_column_stochastic(&mut rng, k, [0.0, 2.0, 8.0][inst % 3]);
        let noisy: Vec<Vec<f64>> = posterior
            .iter()
            .map(|q| (0..k).map(|i| (0..k).map(|j| p[i][j] * q[j]).sum()).collect())
            .collect();
        let mm = MislabelingMatrix::new(p.clone()).unwrap();
        let (beta, gamma) = (mm.beta(), mm.gamma());

        // exact risks by enumeration over (x, y)
        let risk_bq: f64 = votes
            .iter()
            .zip(&posterior)
            .map(|(v, q)| 1.0 - q[first_argmax(v)])
            .sum::<f64>()
            / n as f64;
        let map_risk = |post: &[Vec<f64>]| {
            post.iter().map(|q| 1.0 - q.iter().cloned().fold(0.0, f64::max)).sum::<f64>() / n as f64
        };
        let (r_opt, r_hat_opt) = (map_risk(&posterior), map_risk(&noisy));

        // Thm 1 with true labels
        let m = bounds::margin_moments(&vm(&votes), &vm(&posterior)).unwrap();
        if m.mu1 > 0.0 {
            thm1_checked += 1;
            let cb = bounds::cbound(&m).value;
            let oracle = oracle_cbound(oracle_moment(&votes, &posterior, 1), oracle_moment(&votes, &posterior, 2), 1.0);
            if risk_bq > cb + eps || (cb - oracle.clamp(0.0, 1.0)).abs() > 1e-9 {
                violations.push(format!("thm1 #{inst}: R {risk_bq} CB {cb} oracle {oracle}"));
            }
        }
        // lower bound with imperfect labels
        if r_hat_opt + eps < (1.0 - beta) + beta * r_opt {
            violations.push(format!("eq5 #{inst}: R^ {r_hat_opt} < (1-b)+bR {}", (1.0 - beta) + beta * r_opt));
        }
        // Prop 1 and Thm 2 with noisy labels
        let mh = bounds::margin_moments(&vm(&votes), &vm(&noisy)).unwrap();
        if mh.mu1 > 0.0 {
            prop_checked += 1;
            let b = bounds::cbound_beta(&mh, beta).unwrap().value;
            let g = bounds::cbound_il(&mh, gamma).unwrap().value;
            if r_opt > b + eps || b > g + eps {
                violations.push(format!("prop1/thm2 #{inst}: R {r_opt} beta-bound {b} gamma-bound {g}"));
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = violations.is_empty() && thm1_checked >= 500 && prop_checked >= 500 && secs < 10.0;
    verdict(
        1,
        pass,
        &format!(
            "{instances} instances, {thm1_checked} with mu1>0 (true labels), {prop_checked} with mu1>0 (noisy labels), {} violations, {secs:.2}s",
            violations.len()
        ),
    );
    assert!(pass, "{violations:?}");
}

// ---------- criterion 2 ----------

#[test]
fn criterion_2_moment_oracle() {
    let mut rng = seed::rng(202);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for _ in 0..3000 {
        let k = rng.random_range(2..=6);
        let n = rng.random_range(1..=24 / k);
        assert!(n * k <= 24);
        let votes: Vec<Vec<f64>> = (0..n).map(|_| random_simplex(&mut rng, k, 2.0)).collect();
        let weights: Vec<Vec<f64>> = (0..n).map(|_| random_simplex(&mut rng, k, 2.0)).collect();
        let m = bounds::margin_moments(&vm(&votes), &vm(&weights)).unwrap();
        worst = worst
            .max((m.mu1 - oracle_moment(&votes, &weights, 1)).abs())
            .max((m.mu2 - oracle_moment(&votes, &weights, 2)).abs());
        // the pipeline's own choice W = V as well
        let s = bounds::margin_moments(&vm(&votes), &vm(&votes)).unwrap();
        worst = worst
            .max((s.mu1 - oracle_moment(&votes, &votes, 1)).abs())
            .max((s.mu2 - oracle_moment(&votes, &votes, 2)).abs());
        checked += 1;
    }
    let pass = worst <= 1e-12;
    verdict(2, pass, &format!("{checked} instances with n*K <= 24, max abs deviation {worst:.2e}"));
    assert!(pass);
}

// ---------- criterion 3 ----------

#[test]
fn criterion_3_beta_gamma_properties() {
    let mut rng = seed::rng(303);
    let mut failures = Vec::new();
    for t in 0..1000 {
        let k = rng.random_range(1..=10);
        let p = random_column_stochastic(&mut rng, k, [0.0, 3.0, 50.0][t % 3]);
        let m = MislabelingMatrix::new(p).unwrap();
        for j in 0..k {
            let s: f64 = (0..k).map(|i| m.get(i, j)).sum();
            if (s - 1.0).abs() > 1e-12 {
                failures.push(format!("#{t} column {j} sums to {s}"));
            }
        }
        if m.gamma() < m.beta() {
            failures.push(format!("#{t} gamma {} < beta {}", m.gamma(), m.beta()));
        }
    }
    let identity_beta_ok = (1..=10).all(|k| MislabelingMatrix::identity(k).beta() == 1.0);
    let identity_gamma: Vec<f64> = (1..=10).map(|k| MislabelingMatrix::identity(k).gamma()).collect();
    let identity_gamma_ok = identity_gamma.iter().all(|&g| g == 1.0);
    let attainable = failures.is_empty() && identity_beta_ok;
    verdict(
        3,
        attainable && identity_gamma_ok,
        &format!(
            "1000 matrices: column sums and gamma >= beta {}; identity beta = 1 {}; identity gamma = 1 {} (gamma(I_K) = K: {:?})",
            if failures.is_empty() { "hold" } else { "VIOLATED" },
            if identity_beta_ok { "holds" } else { "VIOLATED" },
            if identity_gamma_ok { "holds" } else { "does not hold" },
            identity_gamma
        ),
    );
    assert!(attainable, "{failures:?}");
}

/// The identity clause of criterion 3 for gamma. Sum of column maxima of the
/// identity is K, so this cannot pass for K >= 2.
#[test]
#[ignore = "gamma of the K x K identity is K by definition; kept red on purpose"]
fn criterion_3_identity_gamma() {
    for k in 1..=10 {
        assert_eq!(MislabelingMatrix::identity(k).gamma(), 1.0, "K = {k}");
    }
}

// ---------- criterion 4 ----------

#[test]
fn criterion_4_mislabeling_estimation() {
    let started = Instant::now();
    let n = 5000;
    let mut rng = seed::rng(404);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let ds = PartitionedDataset::with_classes(Matrix::zeros(n, 1), labels, 2).unwrap();
    // p(2,1) = 0.3 in one-based class numbering
    let truth = MislabelingMatrix::new(vec![vec![0.7, 0.0], vec![0.3, 1.0]]).unwrap();
    let noisy = inject_label_noise(&ds, &truth, 7).unwrap();
    let observed: Vec<Option<usize>> = noisy.observed().iter().map(|&c| Some(c)).collect();
    let est = bounds::estimate_mislabeling(noisy.truth(), &observed, 2, 1.0).unwrap();
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((est.get(i, j) - truth.get(i, j)).abs());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = worst <= 0.05 && secs < 30.0;
    verdict(4, pass, &format!("estimated {:?}, max abs error {worst:.4}, {secs:.2}s", est.rows()));
    assert!(pass);
}

// ---------- criterion 5 ----------

#[test]
fn criterion_5_forest_sanity() {
    let spec = SyntheticSpec {
        n: 2000,
        d: 20,
        informative: 5,
        classes: 3,
        noise: 0.1,
        seed: 505,
    };
    // Overlapping clusters plus label noise keep both errors well above zero.
    let (ds, _) = generate_clusters(spec, 1.0).unwrap();
    let train: Vec<usize> = (0..1000).collect();
    let hold: Vec<usize> = (1000..2000).collect();
    let x = ds.features().select_rows(&train);
    let y: Vec<usize> = train.iter().map(|&i| ds.truth()[i]).collect();
    let forest = Forest::fit(&x, &y, 3, &ForestConfig { tree_count: 200, seed: 5, ..Default::default() }).unwrap();
    let oob = forest.oob_error(&x, &y).unwrap();
    let hv = forest.votes(&ds.features().select_rows(&hold)).unwrap();
    let holdout = hold.iter().enumerate().filter(|(r, &i)| hv.argmax(*r) != ds.truth()[i]).count() as f64 / 1000.0;
    let oob_votes = forest.oob_votes(&x).unwrap().votes;
    let worst_row = (0..hv.rows())
        .map(|r| (hv.row(r).iter().sum::<f64>() - 1.0).abs())
        .chain((0..oob_votes.rows()).map(|r| (oob_votes.row(r).iter().sum::<f64>() - 1.0).abs()))
        .fold(0.0, f64::max);
    let pass = (oob - holdout).abs() <= 0.05 && worst_row <= 1e-9;
    verdict(5, pass, &format!("OOB error {oob:.4}, holdout error {holdout:.4}, max |row sum - 1| {worst_row:.1e}"));
    assert!(pass);
}

// ---------- criterion 6 ----------

#[test]
fn criterion_6_sla_recovery() {
    let started = Instant::now();
    let (mut accs, mut covs) = (Vec::new(), Vec::new());
    for s in 0..5 {
        let spec = SyntheticSpec {
            n: 1200,
            d: 20,
            informative: 5,
            classes: 2,
            noise: 0.0,
            seed: 600 + s,
        };
        let (ds, _) = generate_clusters(spec, 4.0).unwrap();
        let ds = split(&ds, SplitRatios::new(100.0 / 1200.0, 1000.0 / 1200.0, 100.0 / 1200.0).unwrap(), s).unwrap();
        assert_eq!((ds.count(Partition::Labeled), ds.count(Partition::Unlabeled)), (100, 1000));
        let (aug, _) = sla(&ds, &ForestConfig { seed: s, ..Default::default() }, SlaConfig::default()).unwrap();
        accs.push(aug.pseudo_label_accuracy().unwrap_or(0.0));
        covs.push(aug.coverage());
    }
    let (acc, cov) = (median(&accs), median(&covs));
    let secs = started.elapsed().as_secs_f64();
    let pass = acc >= 0.95 && cov >= 0.90 && secs < 120.0;
    verdict(
        6,
        pass,
        &format!("median pseudo-label accuracy {acc:.4}, median coverage {cov:.4} over 5 seeds, {secs:.1}s"),
    );
    assert!(pass);
}

// ---------- criterion 7 ----------

#[test]
fn criterion_7_fsga_recovery() {
    let started = Instant::now();
    let mut rows = Vec::new();
    for s in 0..5u64 {
        let spec = SyntheticSpec {
            n: 1500,
            d: 200,
            informative: 15,
            classes: 2,
            noise: 0.0,
            seed: 700 + s,
        };
        let (ds, meta) = generate_clusters(spec, 2.0).unwrap();
        let ds = split(&ds, SplitRatios::new(0.1, 0.8, 0.1).unwrap(), s).unwrap();
        assert_eq!(ds.count(Partition::Labeled), 150);
        let mut cfg = ExperimentConfig {
            seed: 7000 + s,
            forest: ForestConfig { tree_count: 100, ..Default::default() },
            ga: GaConfig { generations: 10, population: 20, ..Default::default() },
            ..Default::default()
        };
        let mut result = Vec::new();
        for scheme in [Scheme::Fsga, Scheme::Cga] {
            cfg.ga.scheme = scheme;
            let sel = sewil_select(&ds, &cfg).unwrap();
            let acc = evaluate_selection(&ds, &sel.subset, &evaluation_forest(&cfg), cfg.sla).unwrap();
            let hits = sel.subset.indices().iter().filter(|f| meta.informative.contains(f)).count();
            result.push((sel.subset.len() as f64, hits as f64, acc.acc_u.unwrap()));
        }
        let (f, c) = (result[0], result[1]);
        println!(
            "  seed {s}: FSGA {} features ({} informative, ACC-U {:.4}); CGA {} features ({} informative, ACC-U {:.4})",
            f.0, f.1, f.2, c.0, c.1, c.2
        );
        rows.push((f.0, f.1, f.0 / c.0, f.2 - c.2));
    }
    let size = median(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let hits = median(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let ratio = median(&rows.iter().map(|r| r.2).collect::<Vec<_>>());
    let gap = median(&rows.iter().map(|r| r.3).collect::<Vec<_>>());
    let secs = started.elapsed().as_secs_f64();
    let pass = size <= 50.0 && hits >= 10.0 && ratio <= 0.3 && gap >= -0.03 && secs < 1800.0;
    verdict(
        7,
        pass,
        &format!(
            "medians over 5 seeds: |FSGA| {size}, informative {hits}, |FSGA|/|CGA| {ratio:.3}, ACC-U(FSGA) - ACC-U(CGA) {gap:+.4}, {secs:.0}s"
        ),
    );
    assert!(pass);
}

// ---------- criterion 8 ----------

#[test]
fn criterion_8_criterion_robustness() {
    let started = Instant::now();
    let mut wins = 0;
    let mut gt_ok = true;
    let mut same_pick = 0;
    let mut per_subset_wins = 0;
    for s in 0..5u64 {
        let spec = SyntheticSpec {
            n: 900,
            d: 40,
            informative: 8,
            classes: 3,
            noise: 0.0,
            seed: 800 + s,
        };
        let (ds, _) = generate_clusters(spec, 1.5).unwrap();
        let ds = split(&ds, SplitRatios::new(0.1, 0.8, 0.1).unwrap(), s).unwrap();
        let cfg = ExperimentConfig {
            seed: 8000 + s,
            forest: ForestConfig { tree_count: 100, ..Default::default() },
            ..Default::default()
        };
        let cmp = criterion_comparison(&ds, &cfg, Some(0.2)).unwrap();
        let acc = |c: Criterion| cmp.pick(c).unwrap().acc_u.unwrap();
        let gt = cmp.gt.unwrap();
        gt_ok &= Criterion::ALL.iter().all(|&c| gt >= acc(c));
        if acc(Criterion::Cbil) >= acc(Criterion::Cb) {
            wins += 1;
        }
        if cmp.pick(Criterion::Cbil).unwrap().index == cmp.pick(Criterion::Cb).unwrap().index {
            same_pick += 1;
        }
        // the per-subset mislabeling variant, reported for information
        let per = ExperimentConfig {
            gamma_mode: GammaMode::PerSubset,
            ..cfg.clone()
        };
        let cmp2 = criterion_comparison(&ds, &per, Some(0.2)).unwrap();
        let acc2 = |c: Criterion| cmp2.pick(c).unwrap().acc_u.unwrap();
        if acc2(Criterion::Cbil) >= acc2(Criterion::Cb) {
            per_subset_wins += 1;
        }
        println!(
            "  seed {s}: OOB {:.4} CB {:.4} CBIL {:.4} GT {gt:.4} | per-subset gamma: CB {:.4} CBIL {:.4}",
            acc(Criterion::Oob),
            acc(Criterion::Cb),
            acc(Criterion::Cbil),
            acc2(Criterion::Cb),
            acc2(Criterion::Cbil)
        );
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = wins >= 3 && gt_ok;
    verdict(
        8,
        pass,
        &format!(
            "CBIL >= CB in {wins}/5 seeds ({same_pick}/5 identical picks under a run-wide gamma; per-subset gamma {per_subset_wins}/5), GT dominance {}, {secs:.0}s",
            if gt_ok { "holds" } else { "VIOLATED" }
        ),
    );
    assert!(pass);
}

// ---------- criterion 9 ----------

#[test]
fn criterion_9_elitism_and_determinism() {
    let spec = SyntheticSpec {
        n: 400,
        d: 30,
        informative: 5,
        classes: 2,
        noise: 0.05,
        seed: 909,
    };
    let (ds, _) = generate_clusters(spec, 1.5).unwrap();
    let ds = split(&ds, SplitRatios::new(0.2, 0.7, 0.1).unwrap(), 9).unwrap();
    let aug = AugmentedSet::from_labeled(ds.clone());
    let fcfg = ForestConfig { tree_count: 30, ..Default::default() };
    let ctx = EvaluationContext::new(&aug, &fcfg, Criterion::Cbil, 1.3).unwrap();
    let mut monotone_runs = 0;
    let mut runs = 0;
    for s in 0..4 {
        for scheme in [Scheme::Cga, Scheme::Fsga] {
            let cfg = GaConfig { generations: 8, population: 12, parents: 4, scheme, seed: s, ..Default::default() };
            let out = genetic::run(&ctx, &cfg).unwrap();
            runs += 1;
            if out.trace.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness) {
                monotone_runs += 1;
            }
        }
    }

    let mut cfg = ExperimentConfig {
        trials: 3,
        seed: 99,
        forest: ForestConfig { tree_count: 30, ..Default::default() },
        ga: GaConfig { generations: 4, population: 10, parents: 3, ..Default::default() },
        ..Default::default()
    };
    let mut reports = Vec::new();
    for workers in [1, 3, 1] {
        cfg.workers = workers;
        reports.push(pipeline::run_experiment_on(&ds, &cfg).unwrap().to_json().unwrap());
    }
    let identical = reports.windows(2).all(|w| w[0] == w[1]);
    let pass = monotone_runs == runs && identical;
    verdict(
        9,
        pass,
        &format!(
            "best fitness non-increasing in {monotone_runs}/{runs} runs; JSON reports across worker counts 1/3/1 {}",
            if identical { "byte-identical" } else { "DIFFER" }
        ),
    );
    assert!(pass);
}

// ---------- criterion 10 ----------

#[test]
fn criterion_10_mann_whitney() {
    let mut rng = seed::rng(1010);
    let mut checked = 0;
    let mut mismatches = 0;
    for nx in 1..=6 {
        for ny in 1..=6 {
            for _ in 0..200 {
                let x: Vec<f64> = (0..nx).map(|_| f64::from(rng.random_range(0u8..5))).collect();
                let y: Vec<f64> = (0..ny).map(|_| f64::from(rng.random_range(0u8..5))).collect();
                let mut u = 0.0;
                for a in &x {
                    for b in &y {
                        u += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
                    }
                }
                let r = pipeline::mann_whitney_u(&x, &y).unwrap();
                checked += 1;
                if r.u_x != u || r.u_x + r.u_y != (nx * ny) as f64 {
                    mismatches += 1;
                }
            }
        }
    }
    let pass = mismatches == 0;
    verdict(10, pass, &format!("{checked} sample pairs with sizes 1..=6, {mismatches} mismatches"));
    assert!(pass);
}
