//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ingest
    #[error("missing data at row {row}, column {column}")]
    MissingData { row: usize, column: String },
    #[error("non-positive price {value} at row {row}, column {column}")]
    NonPositivePrice {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("duplicate ticker {0}")]
    DuplicateTicker(String),
    #[error("timestamps not strictly increasing at row {0}")]
    NonMonotoneTimestamps(usize),
    #[error("sector map names unknown ticker {0}")]
    UnknownTickerInSectorMap(String),
    #[error("series of length {len} too short for tau={tau}")]
    SeriesTooShort { len: usize, tau: usize },
    #[error("degenerate series: quantile boundaries coincide")]
    DegenerateSeries,
    #[error("lag {lag} too large for {len} return rows")]
    LagTooLarge { lag: usize, len: usize },

    // infocore
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("empty sample: count table has m = 0")]
    EmptySample,

    // significance
    #[error("invalid alphabet size {0}")]
    InvalidAlphabet(usize),
    #[error("p-value {0} outside valid range")]
    InvalidP(f64),
    #[error("quantile inversion failed to converge for shape {shape}, q {q}")]
    ConvergenceFailure { shape: f64, q: f64 },
    #[error("significance model mismatch: {0}")]
    ModelMismatch(String),

    // netstats
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero variance in correlation input")]
    ZeroVariance,
    #[error("insufficient data for distribution fit: {0}")]
    InsufficientData(String),
    #[error("node {0} has no sector label")]
    MissingSectorLabel(String),
    #[error("unsupported export format {0}")]
    UnsupportedFormat(String),
    #[error("degenerate range: all values equal")]
    DegenerateRange,

    // synth / config
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),

    // io
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code per the CLI contract: 1 for input/config errors,
    /// 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure { .. } | Error::ZeroVariance => 2,
            _ => 1,
        }
    }
}
