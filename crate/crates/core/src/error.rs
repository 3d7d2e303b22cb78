use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {t} lies outside the domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("index {n} is below the index origin {origin}")]
    Index { n: u64, origin: u64 },

    #[error("operation not supported for the {family} family")]
    UnsupportedFamily { family: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("series did not reach tolerance within {n_max} terms (tail bound {tail_bound:e})")]
    TruncationFailure { n_max: u64, tail_bound: f64 },

    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),

    #[error("sequence is not certified summable: {0}")]
    NotSummable(String),

    #[error("refinement exponent {0} must lie in [0, 1)")]
    BadExponent(f64),

    #[error("bad index sequence: {0}")]
    BadIndexSequence(String),

    #[error("the pseudometric d_K is not known to be a metric for the {family} family")]
    MetricAssumptionUnmet { family: &'static str },

    #[error("index origins do not match: {0}")]
    IndexMismatch(String),

    #[error("Cholesky factorisation failed at every precision up to {max_bits} bits")]
    PrecisionExhausted { max_bits: u32 },

    #[error("observation points {i} and {j} coincide")]
    DuplicatePoints { i: usize, j: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
