//! Repeated-trial experiment with file artifacts: a CSV dataset, a versioned
//! TOML config, the JSON report, the per-trial CSV and a subset file.

use sewil::dataset::{generate_synthetic, write_csv, FeatureSubset, SyntheticSpec};
use sewil::forest::ForestConfig;
use sewil::genetic::GaConfig;
use sewil::pipeline::{read_subset, run_experiment, write_subset, DatasetSource, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("sewil_experiment_example");
    std::fs::create_dir_all(&dir)?;

    let spec = SyntheticSpec { n: 300, d: 12, informative: 3, classes: 2, noise: 0.05, seed: 2 };
    let (ds, meta) = generate_synthetic(spec)?;
    let data = dir.join("data.csv");
    write_csv(&ds, &data)?;
    meta.save(&dir.join("data.csv.meta.json"))?;

    let cfg = ExperimentConfig {
        dataset: Some(DatasetSource::Csv {
            path: data,
            label_column: "label".into(),
            delimiter: ',',
            header: true,
        }),
        trials: 3,
        forest: ForestConfig { tree_count: 30, ..Default::default() },
        ga: GaConfig { generations: 3, population: 8, parents: 3, ..Default::default() },
        ..Default::default()
    };
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let cfg = ExperimentConfig::load(&dir.join("config.toml"))?;

    let report = run_experiment(&cfg)?;
    report.write_json(&dir.join("report.json"))?;
    report.write_csv(&dir.join("trials.csv"))?;
    println!("{}", report.table());

    let loaded = cfg.dataset.as_ref().expect("dataset set above").load()?;
    let chosen = report.trials[0].subset.clone().unwrap_or_default();
    let subset = FeatureSubset::new(chosen, loaded.dimension())?;
    let subset_path = dir.join("subset.txt");
    write_subset(&subset_path, &subset, &loaded.content_hash())?;
    println!("subset file round trip: {:?}", read_subset(&subset_path, &loaded)?.indices());
    println!("artifacts in {}", dir.display());
    Ok(())
}
