//! Crate-wide error type.
//!
//! Operations that enumerate fail loudly when their estimated work exceeds
//! the configured budget; nothing is silently subsampled or truncated.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid variable partition: {0}")]
    BadPartition(String),

    #[error("enumeration budget exceeded: {what} needs ~{needed} terms, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("quadrature tolerance {tol} not reachable within {nodes} nodes")]
    QuadratureBudget { tol: f64, nodes: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Work budget for enumerating operations, counted in visited terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u128);

impl Default for Budget {
    fn default() -> Self {
        Budget(100_000_000)
    }
}

impl Budget {
    /// Errors out unless `needed` terms fit under the budget.
    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.0 {
            Err(Error::BudgetExceeded {
                what,
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}
