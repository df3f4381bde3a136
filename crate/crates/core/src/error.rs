use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("corrupted engine state: {0}")]
    CorruptState(String),

    #[error("event budget of {0} events exhausted before the horizon")]
    EventBudget(u64),

    #[error("trajectory does not cover [{from}, {to}]")]
    Coverage { from: f64, to: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error at {pointer}: {reason}")]
    Config { pointer: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
