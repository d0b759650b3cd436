//! Pseudo-label unlabeled rows with the self-learning loop and estimate how
//! often the pseudo-labels disagree with the hidden truth.

use sewil::dataset::{generate_clusters, split, SplitRatios, SyntheticSpec};
use sewil::forest::ForestConfig;
use sewil::selflearn::{sla, SlaConfig};

fn main() -> sewil::Result<()> {
    let spec = SyntheticSpec { n: 600, d: 10, informative: 4, classes: 3, noise: 0.0, seed: 4 };
    let (ds, _) = generate_clusters(spec, 3.0)?;
    let ds = split(&ds, SplitRatios::new(0.1, 0.8, 0.1)?, 4)?;

    let fcfg = ForestConfig { tree_count: 100, ..Default::default() };
    let (aug, _forest) = sla(&ds, &fcfg, SlaConfig::default())?;
    for r in aug.trace() {
        println!("{r:?}");
    }
    println!(
        "{} pseudo-labels after {} rounds, coverage {:.2}, accuracy {:.3}",
        aug.pseudo_labels().len(),
        aug.rounds(),
        aug.coverage(),
        aug.pseudo_label_accuracy().unwrap_or(f64::NAN)
    );
    Ok(())
}
