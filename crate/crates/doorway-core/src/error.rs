use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed CSV header: expected `num_satellites,snr_db,rss_dbm,entrance,distance_m,note` (note optional), found `{found}`")]
    MalformedHeader { found: String },

    #[error("line {line}, column `{column}`: {reason}")]
    RowParse {
        line: u64,
        column: &'static str,
        reason: String,
    },

    #[error("line {line}: field `{field}` value {value} outside its physical envelope")]
    RangeViolation {
        line: u64,
        field: &'static str,
        value: f64,
    },

    #[error("entrance radius must be positive, got {radius}")]
    NonpositiveRadius { radius: f64 },

    #[error("dataset must contain at least one row")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid k={k} for {n_rows} training rows (k must be odd and 1 <= k <= rows)")]
    BadK { k: usize, n_rows: usize },

    #[error("training data must contain both classes")]
    SingleClassDataset,

    #[error("invalid hyperparameter `{name}`: {reason}")]
    BadHyperparameter { name: &'static str, reason: String },

    #[error("smoothing window must be odd and >= 1, got {window}")]
    BadWindow { window: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid trace: {reason}")]
    InvalidTrace { reason: String },

    #[error("invalid generator spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("feature value at index {index} is not finite ({value})")]
    NonFiniteFeature { index: usize, value: f64 },

    #[error("{folds} folds require at least {folds} minority-class samples, found {minority}")]
    TooFewMinoritySamples { folds: usize, minority: usize },

    #[error("no entrance detected: no positive prediction survived smoothing")]
    NoEntranceDetected,

    #[error("unknown algorithm `{algo}` (expected knn, nb, tree, or svm)")]
    UnknownAlgo { algo: String },

    #[error("unsupported model format version {found}")]
    VersionMismatch { found: u64 },

    #[error("malformed model document: {reason}")]
    MalformedDocument { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
