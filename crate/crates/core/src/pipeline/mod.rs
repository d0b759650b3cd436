//! End-to-end selection: self-learning, label-noise estimation, bound-driven
//! genetic search, evaluation, multi-trial experiments and reports.

mod config;
mod context;
mod experiment;
mod protocol;
mod report;
mod stats;
mod subset_file;

pub use config::{DatasetSource, ExperimentConfig, CONFIG_VERSION};
pub use context::{
    estimate_label_noise, Criterion, EvaluationContext, GammaMode, SubsetScores, TrainingPool, VotePool,
};
pub use experiment::{
    compare_criteria_on, compare_search_on, evaluate_subset_on, load_configured, run_experiment, run_experiment_on, run_trials,
    trial_seed, TrialOutcome, TrialStatus,
};
pub use protocol::{
    compare_search, criterion_comparison, criterion_comparison_with_deadline, evaluate_selection,
    evaluate_selection_with_deadline, evaluation_forest, prepare, sewil_select, sewil_select_with_deadline,
    CandidateRecord, CriterionComparison, CriterionPick, Prepared, SearchResult, SelectionAccuracy,
    SelectionOutcome,
};
pub use report::{
    Aggregate, CriteriaReport, CriteriaSummary, CriteriaTrial, EvaluationReport, EvaluationTrial, MeanStd, SearchReport, SelectionReport,
    TrialRecord, REPORT_VERSION, SIGNIFICANCE_LEVEL,
};
pub use stats::{mann_whitney_u, mean_std, u_statistic, MannWhitney, PValueMethod, NORMAL_APPROX_MIN};
pub use subset_file::{format_subset, parse_subset, read_subset, write_subset};
