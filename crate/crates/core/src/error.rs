use std::io;

use thiserror::Error;

/// Errors produced by the numerical kernels and the artifact readers/writers.
#[derive(Debug, Error)]
pub enum CwError {
    /// An argument lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (bad spin value, wrong shape, wrong normalization).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("enumeration cap exceeded: N = {n} > cap = {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error(
        "quadrature did not converge: achieved relative error {achieved:.3e}, target {target:.3e}"
    )]
    Quadrature { achieved: f64, target: f64 },

    /// Iterative linear algebra failure (eigensolver, singular solve).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CwError>;

impl CwError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CwError::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CwError::Input(msg.into())
    }
}
