use thiserror::Error;

/// Errors raised by the rhythm, model and enumeration layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid period {0}: expected n >= 2")]
    InvalidPeriod(u64),

    #[error("invalid rhythm: {0}")]
    InvalidRhythm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("multiplier {multiplier} is not invertible modulo {period}")]
    NonInvertibleMultiplier { multiplier: u64, period: u64 },

    #[error("rhythm does not contain 0")]
    UnanchoredRhythm,

    #[error("cardinality {cardinality} does not divide period {period}")]
    NonDivisibleCardinality { cardinality: usize, period: usize },

    #[error("invalid divisor: the zero polynomial divides nothing")]
    InvalidDivisor,

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("rhythms live in different periods ({0} and {1})")]
    InvalidPair(usize, usize),

    #[error("period {period} exceeds the oracle size guard {guard}; use the cutting enumeration instead")]
    OracleTooLarge { period: usize, guard: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
