//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number in a numeric column")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column {name:?} is constant; it cannot be scaled to unit norm")]
    ConstantColumn { name: String },

    #[error("response is constant")]
    ConstantResponse,

    #[error("response must be binary (0/1) for this operation")]
    ResponseNotBinary,

    #[error("binary response has mean {mean}; need 0 < mean(y) < 1")]
    DegenerateResponse { mean: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset is not standardized; call standardize first")]
    NotStandardized,

    #[error("active set is rank deficient (column {column} adds no new direction)")]
    RankDeficient { column: usize },

    #[error("data appear separable; the unpenalized logistic likelihood has no maximizer")]
    Separation,

    #[error("{what} did not converge within {limit} iterations")]
    NonConvergence { what: &'static str, limit: usize },

    #[error("linearized step denominator vanished; the competitor direction carries no curvature")]
    StepDegenerate,

    #[error("coordinate {index} has zero curvature but nonzero gradient; the objective is unbounded along it")]
    UnboundedCoordinate { index: usize },

    #[error("dataset fingerprint does not match the path's training data")]
    FingerprintMismatch,

    #[error("fold {fold} failed: {source}")]
    FoldFailure {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset file not found: {path}")]
    MissingDataset { path: PathBuf },

    #[error("non-finite value encountered in {what}")]
    NonFinite { what: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    /// The CLI maps these to exit code 2 and everything else to 3.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Io(_)
            | Error::Csv(_)
            | Error::ParseCell { .. }
            | Error::ConstantColumn { .. }
            | Error::ConstantResponse
            | Error::ResponseNotBinary
            | Error::DegenerateResponse { .. }
            | Error::DimensionMismatch { .. }
            | Error::DegenerateSplit(_)
            | Error::InvalidArgument(_)
            | Error::NotStandardized
            | Error::FingerprintMismatch
            | Error::MissingDataset { .. } => true,
            Error::FoldFailure { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
