use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not unit length (norm {norm}, tolerance {tolerance})")]
    NotUnit { norm: f64, tolerance: f64 },

    #[error("dimension {0} is too small; at least 2 is required")]
    DimensionTooSmall(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("at least {required} agents are required, got {found}")]
    TooFewAgents { required: usize, found: usize },

    #[error("exact search supports dimension <= {max}, got {found}; use the heuristic solver instead")]
    DimensionUnsupported { max: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("schedule exhausted after {0} interventions")]
    ScheduleExhausted(usize),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("intervention at step {step} is not one of the duel influencers")]
    ScheduleMismatch { step: usize },

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
