use thiserror::Error;

use crate::lp::FractionalSolution;
use crate::rational::ParseRationalError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("item {id}: {reason}")]
    InvalidItem { id: usize, reason: String },

    #[error("cardinality bound must be at least 1 (got {0})")]
    InvalidCardinality(i64),

    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error(transparent)]
    Parse(#[from] ParseRationalError),

    #[error("column generation did not converge within {iterations} iterations (objective {objective})")]
    ConvergenceFailure {
        iterations: usize,
        objective: f64,
        best: Box<FractionalSolution>,
    },

    #[error("numerical instability in LP solve: {0}")]
    NumericalInstability(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("instance too large for exact oracle: {n} items (limit {limit})")]
    TooLarge { n: usize, limit: usize },
}
