use thiserror::Error;

/// Errors raised by geometry, problem construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    Dimension {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("point is not on the {manifold} manifold (residual {residual:.3e})")]
    Infeasible { manifold: &'static str, residual: f64 },

    #[error("degenerate retraction on the {manifold} manifold: {detail}")]
    DegenerateRetraction {
        manifold: &'static str,
        detail: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("line search failed after {backtracks} backtracks")]
    LineSearchFailure { backtracks: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
