use thiserror::Error;

use crate::driver::SolveResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomials do not share basis and degrees")]
    ShapeMismatch,

    #[error("theta must be at least 1, got {0}")]
    InvalidTheta(f64),

    #[error("jacobian is numerically singular")]
    SingularJacobian,

    #[error("binary search for the safe radius did not converge")]
    NoConvergence,

    #[error("patch budget of {limit} exhausted before the queue emptied")]
    BudgetExhausted {
        limit: usize,
        partial: Box<SolveResult>,
    },

    #[error("line direction is the zero vector")]
    ZeroDirection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
