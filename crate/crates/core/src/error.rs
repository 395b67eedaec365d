use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("disconnected domain: interior mask has {components} face-connected components")]
    DisconnectedDomain { components: usize },

    #[error("invalid shape spec `{0}`")]
    InvalidShape(String),

    #[error("mask file {path}: {reason}")]
    MaskFormat { path: PathBuf, reason: String },

    #[error("field is defined on a different grid domain")]
    DomainMismatch,

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("gradient check unavailable: extremal cell {cell} is adjacent to the boundary")]
    GradientUnavailable { cell: usize },

    #[error("rearrangement requires a nonnegative field (min value {min:.3e})")]
    NegativeField { min: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for numerical failures (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
