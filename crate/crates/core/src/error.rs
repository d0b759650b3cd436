use std::path::PathBuf;

/// Errors produced anywhere in the selection toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no data rows")]
    NoDataRows,
    #[error("non-numeric feature cell at row {row}, column `{column}`: {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("unknown label column `{0}`")]
    UnknownLabelColumn(String),
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: indices not ascending")]
    IndicesNotAscending { line: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("feature index {index} out of range for dimension {dimension}")]
    FeatureOutOfRange { index: usize, dimension: usize },
    #[error("empty feature subset")]
    EmptySubset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("class index {class} out of range for {classes} classes")]
    InvalidClass { class: usize, classes: usize },
    #[error("no out-of-bag coverage")]
    ZeroCoverage,
    #[error("not enough live features: requested {requested}, available {available}")]
    NotEnoughFeatures { requested: usize, available: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("time limit exceeded")]
    TimeLimitExceeded,
    #[error("subset file was written for dataset {expected}, not {actual}")]
    DatasetMismatch { expected: String, actual: String },
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
