use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} = {value} lies outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("time step {dt:e} s exceeds the stable bound {bound:e} s")]
    Cfl { dt: f64, bound: f64 },

    #[error("non-finite state after step {step}")]
    NonFinite { step: u64 },

    #[error("division by zero at index {index}: {context}")]
    DivisionByZero { index: usize, context: &'static str },

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("unknown absorption model `{0}`")]
    UnknownModel(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable, machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Domain { .. } => "domain",
            Error::Cfl { .. } => "cfl",
            Error::NonFinite { .. } => "non_finite",
            Error::DivisionByZero { .. } => "division_by_zero",
            Error::Row { .. } => "row",
            Error::UnknownModel(_) => "unknown_model",
            Error::Optimizer(_) => "optimizer",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }
}
