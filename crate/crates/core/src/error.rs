use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An MGF argument lies at or beyond the inverse-Gaussian branch point.
    #[error("domain error: {0}")]
    Domain(String),

    /// A finite input produced a non-finite result.
    #[error("range error: {0}")]
    Range(String),

    /// The severity dispersion calibration produced an invalid value.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// The operation is not defined for the given arguments.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("singular normal equations (condition number {condition:.3e})")]
    SingularSystem { condition: f64 },

    /// A record violates one of its construction invariants.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("length mismatch: {left} covariates vs {right} coefficients")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative premium {0}")]
    NegativePremium(f64),

    #[error("simulation size {requested} exceeds the configured cap {cap}")]
    SizeLimit { requested: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
