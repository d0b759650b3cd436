//! Experiment reports: JSON documents, per-trial CSV and plain-text tables.
//!
//! JSON reports hold no timing, so identical seeds give byte-identical files.
//! Wall-clock time goes to the CSV only.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::context::Criterion;
use super::experiment::TrialStatus;
use super::protocol::{CriterionComparison, SelectionAccuracy, SelectionOutcome};
use super::stats::{mann_whitney_u, mean_std, MannWhitney};
use crate::error::{Error, Result};
use crate::genetic::{GenerationTrace, Scheme};

pub const REPORT_VERSION: u32 = 1;

/// Significance level used for report flags.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let ms = mean_std(values);
        Self {
            count: values.len(),
            mean: ms.map(|m| m.0),
            std: ms.map(|m| m.1),
        }
    }

    fn cell(&self) -> String {
        match (self.mean, self.std) {
            (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
            _ => "NA".into(),
        }
    }
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub subset: Option<Vec<usize>>,
    pub size: Option<usize>,
    pub acc_u: Option<f64>,
    pub acc_t: Option<f64>,
    pub oob: Option<f64>,
    pub cb: Option<f64>,
    pub cbil: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub pseudo_labels: Option<usize>,
    pub pseudo_accuracy: Option<f64>,
    pub removed: Vec<usize>,
    pub generations: Vec<GenerationTrace>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl TrialRecord {
    pub fn completed(trial: usize, seed: u64, sel: &SelectionOutcome, acc: SelectionAccuracy, wall_seconds: f64) -> Self {
        Self {
            trial,
            seed,
            status: TrialStatus::Completed,
            subset: Some(sel.subset.indices().to_vec()),
            size: Some(sel.subset.len()),
            acc_u: acc.acc_u,
            acc_t: acc.acc_t,
            oob: Some(sel.scores.oob_error),
            cb: Some(sel.scores.cbound.value),
            cbil: Some(sel.scores.cbound_il.value),
            gamma: Some(sel.gamma),
            beta: Some(sel.beta),
            pseudo_labels: Some(sel.pseudo_labels),
            pseudo_accuracy: sel.pseudo_accuracy,
            removed: sel.removed.clone(),
            generations: sel.generations.clone(),
            wall_seconds,
        }
    }

    pub fn timed_out(trial: usize, seed: u64, wall_seconds: f64) -> Self {
        Self {
            trial,
            seed,
            status: TrialStatus::TimedOut,
            subset: None,
            size: None,
            acc_u: None,
            acc_t: None,
            oob: None,
            cb: None,
            cbil: None,
            gamma: None,
            beta: None,
            pseudo_labels: None,
            pseudo_accuracy: None,
            removed: Vec::new(),
            generations: Vec::new(),
            wall_seconds,
        }
    }

    fn is_completed(&self) -> bool {
        self.status == TrialStatus::Completed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub completed: usize,
    pub timed_out: usize,
    pub size: MeanStd,
    pub acc_u: MeanStd,
    pub acc_t: MeanStd,
}

impl Aggregate {
    /// Summary over completed trials only.
    pub fn of(trials: &[TrialRecord]) -> Self {
        let done: Vec<&TrialRecord> = trials.iter().filter(|t| t.is_completed()).collect();
        let col = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Vec<f64> { done.iter().filter_map(|t| f(t)).collect() };
        Self {
            completed: done.len(),
            timed_out: trials.len() - done.len(),
            size: MeanStd::of(&col(&|t| t.size.map(|s| s as f64))),
            acc_u: MeanStd::of(&col(&|t| t.acc_u)),
            acc_t: MeanStd::of(&col(&|t| t.acc_t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub version: u32,
    pub dataset_hash: String,
    pub seed: u64,
    pub criterion: Criterion,
    pub scheme: Scheme,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl SelectionReport {
    pub fn new(dataset_hash: String, cfg: &ExperimentConfig, mut trials: Vec<TrialRecord>) -> Self {
        trials.sort_by_key(|t| t.trial);
        let aggregate = Aggregate::of(&trials);
        Self {
            version: REPORT_VERSION,
            dataset_hash,
            seed: cfg.seed,
            criterion: cfg.criterion,
            scheme: cfg.ga.scheme,
            trials,
            aggregate,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    pub fn column(&self, f: impl Fn(&TrialRecord) -> Option<f64>) -> Vec<f64> {
        self.trials.iter().filter(|t| t.is_completed()).filter_map(f).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(csv_header())?;
        for t in &self.trials {
            w.write_record(csv_row(t, self.scheme))?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5} {:>9} {:>5} {:>8} {:>8} {:>8} {:>8}",
            "trial", "status", "d'", "ACC-U", "ACC-T", "fitness", "gamma"
        );
        for t in &self.trials {
            let f = |v: Option<f64>| v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"));
            let fitness = match self.criterion {
                Criterion::Oob => t.oob,
                Criterion::Cb => t.cb,
                Criterion::Cbil => t.cbil,
            };
            let _ = writeln!(
                out,
                "{:>5} {:>9} {:>5} {:>8} {:>8} {:>8} {:>8}",
                t.trial,
                if t.is_completed() { "done" } else { "timeout" },
                t.size.map_or_else(|| "NA".into(), |s| s.to_string()),
                f(t.acc_u),
                f(t.acc_t),
                f(fitness),
                f(t.gamma)
            );
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "{} completed, {} timed out; d' {}  ACC-U {}  ACC-T {}",
            a.completed,
            a.timed_out,
            a.size.cell(),
            a.acc_u.cell(),
            a.acc_t.cell()
        );
        out
    }
}

fn csv_header() -> Vec<&'static str> {
    vec![
        "scheme", "trial", "seed", "status", "size", "acc_u", "acc_t", "oob", "cb", "cbil", "gamma", "beta",
        "pseudo_labels", "pseudo_accuracy", "removed", "wall_seconds", "subset",
    ]
}

fn csv_row(t: &TrialRecord, scheme: Scheme) -> Vec<String> {
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    vec![
        format!("{scheme:?}").to_lowercase(),
        t.trial.to_string(),
        t.seed.to_string(),
        if t.is_completed() { "completed" } else { "timed_out" }.into(),
        t.size.map_or_else(|| "NA".into(), |s| s.to_string()),
        na(t.acc_u),
        na(t.acc_t),
        na(t.oob),
        na(t.cb),
        na(t.cbil),
        na(t.gamma),
        na(t.beta),
        t.pseudo_labels.map_or_else(|| "NA".into(), |s| s.to_string()),
        na(t.pseudo_accuracy),
        t.removed.len().to_string(),
        format!("{:.3}", t.wall_seconds),
        t.subset.as_deref().map_or_else(|| "NA".into(), join),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaTrial {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub comparison: Option<CriterionComparison>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl CriteriaTrial {
    fn acc(&self, c: Criterion) -> Option<f64> {
        self.comparison.as_ref()?.pick(c)?.acc_u
    }

    fn gt(&self) -> Option<f64> {
        self.comparison.as_ref()?.gt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaSummary {
    pub oob: MeanStd,
    pub cb: MeanStd,
    pub cbil: MeanStd,
    pub gt: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub version: u32,
    pub dataset_hash: String,
    pub seed: u64,
    pub corruption: Option<f64>,
    pub trials: Vec<CriteriaTrial>,
    pub summary: CriteriaSummary,
}

impl CriteriaReport {
    pub fn new(dataset_hash: String, cfg: &ExperimentConfig, corruption: Option<f64>, mut trials: Vec<CriteriaTrial>) -> Self {
        trials.sort_by_key(|t| t.trial);
        let col = |f: &dyn Fn(&CriteriaTrial) -> Option<f64>| MeanStd::of(&trials.iter().filter_map(f).collect::<Vec<_>>());
        let summary = CriteriaSummary {
            oob: col(&|t| t.acc(Criterion::Oob)),
            cb: col(&|t| t.acc(Criterion::Cb)),
            cbil: col(&|t| t.acc(Criterion::Cbil)),
            gt: col(&|t| t.gt()),
        };
        Self {
            version: REPORT_VERSION,
            dataset_hash,
            seed: cfg.seed,
            corruption,
            trials,
            summary,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trial", "seed", "status", "gamma", "oob", "cb", "cbil", "gt", "wall_seconds"])?;
        for t in &self.trials {
            w.write_record([
                t.trial.to_string(),
                t.seed.to_string(),
                if t.status == TrialStatus::Completed { "completed" } else { "timed_out" }.into(),
                na(t.comparison.as_ref().map(|c| c.gamma)),
                na(t.acc(Criterion::Oob)),
                na(t.acc(Criterion::Cb)),
                na(t.acc(Criterion::Cbil)),
                na(t.gt()),
                format!("{:.3}", t.wall_seconds),
            ])?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let f = |v: Option<f64>| v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"));
        let _ = writeln!(out, "{:>5} {:>8} {:>8} {:>8} {:>8}", "trial", "OOB", "CB", "CBIL", "GT");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{:>5} {:>8} {:>8} {:>8} {:>8}",
                t.trial,
                f(t.acc(Criterion::Oob)),
                f(t.acc(Criterion::Cb)),
                f(t.acc(Criterion::Cbil)),
                f(t.gt())
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "mean  OOB {}  CB {}  CBIL {}  GT {}",
            s.oob.cell(),
            s.cb.cell(),
            s.cbil.cell(),
            s.gt.cell()
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub version: u32,
    pub cga: SelectionReport,
    pub fsga: SelectionReport,
    /// FSGA against CGA over completed trials
    pub acc_u_test: Option<MannWhitney>,
    pub acc_t_test: Option<MannWhitney>,
    pub size_test: Option<MannWhitney>,
}

impl SearchReport {
    pub fn new(cga: SelectionReport, fsga: SelectionReport) -> Result<Self> {
        let test = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Result<Option<MannWhitney>> {
            let (x, y) = (fsga.column(f), cga.column(f));
            if x.is_empty() || y.is_empty() {
                Ok(None)
            } else {
                mann_whitney_u(&x, &y).map(Some)
            }
        };
        Ok(Self {
            version: REPORT_VERSION,
            acc_u_test: test(&|t| t.acc_u)?,
            acc_t_test: test(&|t| t.acc_t)?,
            size_test: test(&|t| t.size.map(|s| s as f64))?,
            cga,
            fsga,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(csv_header())?;
        for (r, scheme) in [(&self.cga, Scheme::Cga), (&self.fsga, Scheme::Fsga)] {
            for t in &r.trials {
                w.write_record(csv_row(t, scheme))?;
            }
        }
        w.flush().map_err(io_err(path))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let flag = |t: &Option<MannWhitney>| match t {
            Some(m) if m.significant(SIGNIFICANCE_LEVEL) => format!("p={:.4} *", m.p_value),
            Some(m) => format!("p={:.4}", m.p_value),
            None => "NA".into(),
        };
        let _ = writeln!(out, "{:>6} {:>18} {:>18} {:>18}", "scheme", "d'", "ACC-U", "ACC-T");
        for (name, r) in [("CGA", &self.cga), ("FSGA", &self.fsga)] {
            let a = &r.aggregate;
            let _ = writeln!(out, "{:>6} {:>18} {:>18} {:>18}", name, a.size.cell(), a.acc_u.cell(), a.acc_t.cell());
        }
        let _ = writeln!(
            out,
            "{:>6} {:>18} {:>18} {:>18}",
            "U test",
            flag(&self.size_test),
            flag(&self.acc_u_test),
            flag(&self.acc_t_test)
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTrial {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub acc_u: Option<f64>,
    pub acc_t: Option<f64>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub dataset_hash: String,
    pub seed: u64,
    pub subset: Vec<usize>,
    pub trials: Vec<EvaluationTrial>,
    pub acc_u: MeanStd,
    pub acc_t: MeanStd,
}

impl EvaluationReport {
    pub fn new(dataset_hash: String, seed: u64, subset: Vec<usize>, mut trials: Vec<EvaluationTrial>) -> Self {
        trials.sort_by_key(|t| t.trial);
        let col = |f: fn(&EvaluationTrial) -> Option<f64>| MeanStd::of(&trials.iter().filter_map(f).collect::<Vec<_>>());
        Self {
            version: REPORT_VERSION,
            dataset_hash,
            seed,
            subset,
            acc_u: col(|t| t.acc_u),
            acc_t: col(|t| t.acc_t),
            trials,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trial", "seed", "status", "acc_u", "acc_t", "wall_seconds"])?;
        for t in &self.trials {
            w.write_record([
                t.trial.to_string(),
                t.seed.to_string(),
                if t.status == TrialStatus::Completed { "completed" } else { "timed_out" }.into(),
                na(t.acc_u),
                na(t.acc_t),
                format!("{:.3}", t.wall_seconds),
            ])?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let f = |v: Option<f64>| v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"));
        let _ = writeln!(out, "subset ({} features): {:?}", self.subset.len(), self.subset);
        let _ = writeln!(out, "{:>5} {:>8} {:>8}", "trial", "ACC-U", "ACC-T");
        for t in &self.trials {
            let _ = writeln!(out, "{:>5} {:>8} {:>8}", t.trial, f(t.acc_u), f(t.acc_t));
        }
        let _ = writeln!(out, "mean  ACC-U {}  ACC-T {}", self.acc_u.cell(), self.acc_t.cell());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, acc: Option<f64>) -> TrialRecord {
        let mut r = TrialRecord::timed_out(trial, 0, 1.5);
        if let Some(a) = acc {
            r.status = TrialStatus::Completed;
            r.acc_u = Some(a);
            r.acc_t = Some(a);
            r.size = Some(3);
            r.subset = Some(vec![0, 1, 2]);
        }
        r
    }

    #[test]
    fn aggregate_skips_timeouts() {
        let a = Aggregate::of(&[record(0, Some(0.8)), record(1, None), record(2, Some(0.6))]);
        assert_eq!((a.completed, a.timed_out), (2, 1));
        assert!((a.acc_u.mean.unwrap() - 0.7).abs() < 1e-12);
        let single = Aggregate::of(&[record(0, Some(0.8))]);
        assert_eq!((single.acc_u.mean, single.acc_u.std), (Some(0.8), Some(0.0)));
        let none = Aggregate::of(&[record(0, None)]);
        assert_eq!((none.completed, none.acc_u.mean), (0, None));
    }

    #[test]
    fn json_has_no_timing_and_csv_does() {
        let cfg = ExperimentConfig::default();
        let report = SelectionReport::new("h".into(), &cfg, vec![record(1, Some(0.5)), record(0, None)]);
        assert_eq!(report.trials[0].trial, 0);
        let json = report.to_json().unwrap();
        assert!(!json.contains("wall"));
        let back: SelectionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.aggregate, Aggregate::of(&back.trials));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        report.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().contains("wall_seconds"));
        assert!(lines.next().unwrap().starts_with("fsga,0,0,timed_out,NA"));
        assert!(report.table().contains("timeout"));
    }
}
