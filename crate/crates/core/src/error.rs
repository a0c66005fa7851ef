use thiserror::Error;

use crate::conic::SdpStatus;

/// Errors produced by state validation, tensor-structure bookkeeping, solver
/// failures, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not Hermitian: max deviation {0:.3e}")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cone program ended with status {status} (value {value:.6e}, residuals {primal:.2e}/{dual:.2e})", status = .status, value = .value, primal = .primal_residual, dual = .dual_residual)]
    SolverFailure {
        status: SdpStatus,
        value: f64,
        primal_residual: f64,
        dual_residual: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
