//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// The problem specification itself is invalid (wrong domain/coefficient
    /// combination, positivity violation, asymmetric matrix, ...).
    #[error("specification error: {0}")]
    Spec(String),

    /// A coefficient expression produced a non-finite value at a point that
    /// was not declared singular.
    #[error("undeclared non-finite evaluation at x = {x}")]
    UndeclaredNonFinite { x: f64 },

    /// Quadrature failed in a way that cannot be reported as a best-effort
    /// estimate (non-finite interior evaluation, invalid interval, ...).
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A numerical pipeline step could not produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Simulation produced no usable paths.
    #[error("simulation failure: {0}")]
    Simulation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
