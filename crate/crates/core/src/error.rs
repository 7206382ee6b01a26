use thiserror::Error;

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },

    #[error("arity mismatch: expected {expected} quanta, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("statistics violation: {0}")]
    Statistics(String),

    #[error("invalid label: {0}")]
    Label(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("wiring error: {0}")]
    Wiring(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("theory bound violated: {0}")]
    BoundViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
