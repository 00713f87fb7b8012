use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument was NaN or infinite.
    #[error("argument `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    /// A parameter was outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A blocking schedule does not have one entry per inner cycle.
    #[error("schedule length mismatch: expected {expected} decisions, got {got}")]
    ScheduleLength { expected: usize, got: usize },

    /// A matrix that must be unitary is not.
    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// Two channels or density operators live on different mode sectors.
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    /// A numerical self-check failed.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
