//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the simulation stack.
///
/// The CLI maps these onto process exit codes: configuration problems
/// ([`Error::Config`], [`Error::Io`], [`Error::Json`]) exit with code 2,
/// failed physics checks inside a command exit with code 1.
#[derive(Debug, Error)]
pub enum Error {
    /// A group definition failed validation (closure, associativity,
    /// identity, inverses, or character consistency).
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    /// The electric transfer matrix lost positive definiteness; its matrix
    /// logarithm is no longer defined.
    #[error(
        "electric transfer matrix not positive definite: eigenvalue {value:.3e} \
         below floor {floor:.0e} (couplings too extreme)"
    )]
    TransferNotPositive { value: f64, floor: f64 },

    /// A state-vector dimension exceeded the configured safety cap.
    #[error("state dimension {dim} exceeds cap {cap}; refusing to allocate")]
    DimensionCap { dim: usize, cap: usize },

    /// The adaptive integrator could not reach the requested tolerance.
    #[error("TDSE integrator failed: {0}")]
    Integrator(String),

    /// Pulse-delay calibration failed to bracket or converge on the
    /// requested rotation angle.
    #[error("pulse calibration failed: {0}")]
    Calibration(String),

    /// A unitary decomposition did not reconstruct its input.
    #[error("unitary decomposition failed: {0}")]
    Decomposition(String),

    /// A gate bank was keyed to different hardware parameters than the run
    /// requesting it.
    #[error("gate bank mismatch: {0}")]
    BankMismatch(String),

    /// Invalid run configuration (bad field values, unknown preset, …).
    #[error("configuration error: {0}")]
    Config(String),

    /// Dense linear algebra backend failure.
    #[error("linear algebra error: {0}")]
    Linalg(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
