use thiserror::Error;

/// Errors surfaced by the library. Precondition violations that a caller can
/// hit with plain data (shape mismatches, NaN inputs, bad parameters) are
/// reported through this type; internal invariants panic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The closed-form candidate at sparsity `s` does not exist because
    /// `1 - s*lam^2 <= 0`; callers enumerate past it.
    #[error("singular candidate at sparsity {s}")]
    SingularCandidate { s: usize },

    /// Multi-output analogue: `1 - s_v*s_w*lam^2` is not safely positive.
    #[error("singular candidate at sparsity pair ({s_v}, {s_w})")]
    SingularPair { s_v: usize, s_w: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    /// Brute-force oracles refuse inputs past their cost guard.
    #[error("oracle guard: {0}")]
    OracleGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
