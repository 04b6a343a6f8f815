use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library. Budget exhaustion and numerical divergence
/// are not errors: they are reported through traces.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not a valid communication matrix: {0}")]
    InvalidMixingMatrix(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("linear system is singular")]
    Singular,

    #[error("gradient descent did not reach tolerance {tol:e} within {iterations} iterations (final gradient norm {grad_norm:e})")]
    NotConverged {
        tol: f64,
        iterations: u64,
        grad_norm: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
