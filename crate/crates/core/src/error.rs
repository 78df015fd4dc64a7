use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    /// Two operands were defined over different mode registers.
    #[error("mode register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A fixed numeric capacity (photons per mode, expansion order, exact
    /// integer range) would be exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A projection or conditioning step selected an outcome of zero probability.
    #[error("empty outcome: {0}")]
    EmptyOutcome(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, FockError>;
