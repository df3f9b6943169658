use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point has a non-finite coordinate")]
    NonFinitePoint,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time index {t} out of range 1..={max}")]
    TimeOutOfRange { t: usize, max: usize },

    #[error("point lies outside the feasible set (constraint violation {violation:.3e})")]
    OutsideSet { violation: f64 },

    #[error("iterate at step {step} is not interior to the feasible set")]
    NonInterior { step: usize },

    #[error("non-finite value produced at step {step}")]
    Numeric { step: usize },

    #[error("unbounded gradient: {reason}")]
    UnboundedGradient { reason: String },

    #[error("hindsight search infeasible: {reason}")]
    HindsightInfeasible { reason: String },

    #[error("{op} requires {required}")]
    Requires {
        op: &'static str,
        required: &'static str,
    },

    #[error("series too short: need at least {needed} points, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("nonpositive cumulative value at t={t}; log-log fit undefined")]
    NonPositiveSeries { t: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
