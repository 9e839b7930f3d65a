use thiserror::Error;

/// Errors raised by the library. Input problems and numerical failures are
/// kept in separate variants so callers (and the CLI exit codes) can tell
/// them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector must have at least one coordinate")]
    EmptyVector,
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("dual vector must be nonzero")]
    ZeroVector,
    #[error("exponent p = {0} is outside [1, inf]")]
    InvalidExponent(f64),
    #[error("exponent p = {0} is not supported by this operation")]
    UnsupportedExponent(f64),
    #[error("sparsity k = {k} must lie in [1, {d}]")]
    InvalidSparsity { k: usize, d: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("tolerance must be finite and nonnegative")]
    InvalidTolerance,
    #[error("sign vector must have exactly {expected} nonzero entries, found {found}")]
    InvalidSignVector { expected: usize, found: usize },
    #[error("cone base z must satisfy z = projection of z onto its weak level set")]
    InvalidConeBase,
    #[error("atom set must be nonempty")]
    EmptyAtomSet,
    #[error("penalty weight must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("gradient vanishes: support identification is vacuous")]
    ZeroGradient,
    #[error("dimension {d} exceeds the supported range (max {max})")]
    ScaleExceeded { d: usize, max: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("sampled atoms do not reproduce the target vector")]
    Infeasible,
    #[error("{what} did not converge after {iterations} iterations (gap {gap:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        gap: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
