//! Fit a random forest, compare its out-of-bag error with a holdout error,
//! inspect feature weights and round-trip the model through JSON.

use sewil::dataset::{generate_clusters, SyntheticSpec};
use sewil::forest::{Forest, ForestConfig};

fn main() -> sewil::Result<()> {
    let spec = SyntheticSpec { n: 800, d: 12, informative: 3, classes: 2, noise: 0.0, seed: 1 };
    let (ds, meta) = generate_clusters(spec, 2.0)?;
    let train: Vec<usize> = (0..600).collect();
    let test: Vec<usize> = (600..800).collect();
    let x = ds.features().select_rows(&train);
    let y: Vec<usize> = train.iter().map(|&i| ds.truth()[i]).collect();

    let forest = Forest::fit(&x, &y, 2, &ForestConfig { tree_count: 100, seed: 3, ..Default::default() })?;
    let pred = forest.predict(&ds.features().select_rows(&test))?;
    let holdout = test.iter().zip(&pred).filter(|(&i, &p)| ds.truth()[i] != p).count() as f64 / test.len() as f64;
    println!("OOB error {:.3}, holdout error {:.3}", forest.oob_error(&x, &y)?, holdout);

    let mut ranked: Vec<(usize, f64)> = forest.feature_weights().into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("informative features: {:?}", meta.informative);
    println!("top weighted: {:?}", ranked.iter().take(3).map(|r| r.0).collect::<Vec<_>>());

    let path = std::env::temp_dir().join("sewil_forest_example.json");
    forest.save_json(&path)?;
    let back = Forest::load_json(&path)?;
    assert_eq!(back.predict(&x)?, forest.predict(&x)?);
    println!("forest saved to {} and reloaded", path.display());
    Ok(())
}
