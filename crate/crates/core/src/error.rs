use thiserror::Error;

use crate::params::Constraint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter constraint violated: {which}")]
    ConstraintViolated { which: Constraint },

    #[error("invalid Buchstab grid: {0}")]
    InvalidGrid(String),

    #[error("argument {0} is outside the domain u >= 1")]
    DomainError(f64),

    #[error("unknown integration domain {0:?}")]
    UnknownDomain(String),

    #[error("integrand returned a non-finite value at {point:?}")]
    NonFiniteSample { point: Vec<f64> },

    #[error("budget {budget} is below the minimum of {min}")]
    BudgetTooSmall { budget: u64, min: u64 },

    #[error("missing estimate for domain {0}")]
    MissingEstimate(String),

    #[error("search bound d^(2/theta) overflows 64 bits for d = {d}")]
    RangeOverflow { d: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
