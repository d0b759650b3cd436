use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sewil::dataset::{self, PartitionedDataset, SyntheticSpec};
use sewil::genetic::Scheme;
use sewil::pipeline::{self, Criterion, DatasetSource, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sewil", version, about = "Semi-supervised wrapper feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select features on a dataset and report accuracy per trial
    Select(Common),
    /// Evaluate a subset file end to end
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// subset file written by `select`
        #[arg(long)]
        subset: PathBuf,
    },
    /// Compare OOB, CB and CBIL on random subsets against the best in the pool
    CompareCriteria {
        #[command(flatten)]
        common: Common,
        /// fraction of pseudo-labels to corrupt before scoring
        #[arg(long)]
        corruption: Option<f64>,
        /// skip end-to-end accuracy of the whole pool (no GT column)
        #[arg(long)]
        skip_gt: bool,
    },
    /// Compare the classic and the weight-aware genetic search
    CompareSearch(Common),
    /// Generate a synthetic dataset with a JSON metadata sidecar
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// CSV or LIBSVM file (by extension: .csv is CSV, anything else LIBSVM)
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// seconds per trial
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, value_parser = parse_criterion)]
    criterion: Option<Criterion>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    #[arg(long)]
    workers: Option<usize>,
    /// write report.json and trials.csv (and subset files for `select`) here
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Linear,
    Clusters,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    informative: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "linear")]
    kind: SynthKind,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    /// output file; `.csv` writes CSV, anything else LIBSVM
    #[arg(long)]
    out: PathBuf,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse().map_err(|e: sewil::Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: sewil::Error| e.to_string())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

impl Common {
    fn config(&self) -> sewil::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.data {
            cfg.dataset = Some(if is_csv(path) {
                DatasetSource::Csv {
                    path: path.clone(),
                    label_column: self.label_column.clone(),
                    delimiter: ',',
                    header: true,
                }
            } else {
                DatasetSource::Libsvm { path: path.clone() }
            });
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if self.time_limit.is_some() {
            cfg.time_limit = self.time_limit;
        }
        if let Some(v) = self.criterion {
            cfg.criterion = v;
        }
        if let Some(v) = self.scheme {
            cfg.ga.scheme = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out(&self, name: &str) -> sewil::Result<Option<PathBuf>> {
        let Some(dir) = &self.out_dir else { return Ok(None) };
        std::fs::create_dir_all(dir).map_err(|source| sewil::Error::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Some(dir.join(name)))
    }
}

fn run(cli: Cli) -> sewil::Result<()> {
    match cli.command {
        Command::Select(c) => {
            let cfg = c.config()?;
            let ds = pipeline::load_configured(&cfg)?;
            let report = pipeline::run_experiment_on(&ds, &cfg)?;
            print!("{}", report.table());
            if let Some(p) = c.out("report.json")? {
                report.write_json(&p)?;
                report.write_csv(&c.out("trials.csv")?.unwrap_or_default())?;
                for t in &report.trials {
                    if let Some(s) = &t.subset {
                        let subset = dataset::FeatureSubset::new(s.clone(), ds.dimension())?;
                        let path = c.out(&format!("subset_trial{}.txt", t.trial))?.unwrap_or_default();
                        pipeline::write_subset(&path, &subset, &report.dataset_hash)?;
                    }
                }
            }
        }
        Command::Evaluate { common: c, subset } => {
            let cfg = c.config()?;
            let ds = pipeline::load_configured(&cfg)?;
            let s = pipeline::read_subset(&subset, &ds)?;
            let report = pipeline::evaluate_subset_on(&ds, &s, &cfg)?;
            print!("{}", report.table());
            if let Some(p) = c.out("report.json")? {
                report.write_json(&p)?;
                report.write_csv(&c.out("trials.csv")?.unwrap_or_default())?;
            }
        }
        Command::CompareCriteria {
            common: c,
            corruption,
            skip_gt,
        } => {
            let mut cfg = c.config()?;
            cfg.skip_gt |= skip_gt;
            let ds = pipeline::load_configured(&cfg)?;
            let report = pipeline::compare_criteria_on(&ds, &cfg, corruption)?;
            print!("{}", report.table());
            if let Some(p) = c.out("report.json")? {
                report.write_json(&p)?;
                report.write_csv(&c.out("trials.csv")?.unwrap_or_default())?;
            }
        }
        Command::CompareSearch(c) => {
            let cfg = c.config()?;
            let ds = pipeline::load_configured(&cfg)?;
            let report = pipeline::compare_search_on(&ds, &cfg)?;
            print!("{}", report.table());
            if let Some(p) = c.out("report.json")? {
                report.write_json(&p)?;
                report.write_csv(&c.out("trials.csv")?.unwrap_or_default())?;
            }
        }
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                n: a.n,
                d: a.d,
                informative: a.informative,
                classes: a.classes,
                noise: a.noise,
                seed: a.seed,
            };
            let (ds, meta): (PartitionedDataset, _) = match a.kind {
                SynthKind::Linear => dataset::generate_synthetic(spec)?,
                SynthKind::Clusters => dataset::generate_clusters(spec, a.separation)?,
            };
            if is_csv(&a.out) {
                dataset::write_csv(&ds, &a.out)?;
            } else {
                dataset::write_libsvm(&ds, &a.out)?;
            }
            let mut sidecar = a.out.clone().into_os_string();
            sidecar.push(".meta.json");
            meta.save(Path::new(&sidecar))?;
            println!(
                "wrote {} ({} rows, {} features, informative {:?})",
                a.out.display(),
                meta.n,
                meta.d,
                meta.informative
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
