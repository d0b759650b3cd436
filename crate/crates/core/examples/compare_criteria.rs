//! Score random subsets with OOB error, the C-bound and the mislabeling-aware
//! C-bound, and see which pick generalizes best to the unlabeled rows.

use sewil::dataset::{generate_clusters, split, SplitRatios, SyntheticSpec};
use sewil::forest::ForestConfig;
use sewil::pipeline::{criterion_comparison, Criterion, ExperimentConfig};

fn main() -> sewil::Result<()> {
    let spec = SyntheticSpec { n: 400, d: 20, informative: 4, classes: 2, noise: 0.0, seed: 5 };
    let (ds, _) = generate_clusters(spec, 2.0)?;
    let ds = split(&ds, SplitRatios::new(0.1, 0.8, 0.1)?, 5)?;
    let cfg = ExperimentConfig {
        forest: ForestConfig { tree_count: 40, ..Default::default() },
        comparison_subsets: 12,
        ..Default::default()
    };
    let cmp = criterion_comparison(&ds, &cfg, Some(0.2))?;
    println!("gamma {:.3}", cmp.gamma);
    for c in Criterion::ALL {
        if let Some(p) = cmp.pick(c) {
            println!("{:>5}: candidate {:2} value {:.4} ACC-U {:?}", c.name(), p.index, p.value, p.acc_u);
        }
    }
    println!("best achievable ACC-U {:?}", cmp.gt);
    Ok(())
}
