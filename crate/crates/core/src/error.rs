use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("loop {loop_index}: edge length {value} is not positive")]
    NonPositiveLength { loop_index: usize, value: String },

    #[error("bridge {bridge_index}: length {value} is negative")]
    NegativeBridge { bridge_index: usize, value: String },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Two step labels apply at once, or the chain fails the ratio test.
    #[error("genericity violation at loop {loop_index}: {detail}")]
    GenericityViolation { loop_index: usize, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: i64, found: i64 },

    /// A tuple of translates is not in general position.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A structural claim checked at runtime did not hold.
    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("complexity cap exceeded: {0}")]
    CapExceeded(String),
}

impl Error {
    /// Errors caused by the caller's input rather than by a computation that
    /// could not be completed.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::NonPositiveLength { .. }
                | Error::NegativeBridge { .. }
                | Error::InvalidPoint(_)
                | Error::Parse(_)
                | Error::GenericityViolation { .. }
                | Error::Precondition(_)
                | Error::DegreeMismatch { .. }
        )
    }
}
