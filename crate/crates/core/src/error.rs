use std::path::PathBuf;

use crate::problem::hint_doc::HintDocError;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid difficulty mix: {0}")]
    InvalidMix(String),
    #[error("token sequence length {found} does not match answer length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown problem id {0}")]
    UnknownProblem(usize),
    #[error("trajectory {index} is marked augmented but its context carries no hint")]
    ContextMismatch { index: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: invalid record: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("filtering removed every problem from the bank")]
    EmptyFilter,
    #[error("cannot plot: {0}")]
    Plot(String),
    #[error(transparent)]
    HintDoc(#[from] HintDocError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_) | Error::InvalidMix(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
