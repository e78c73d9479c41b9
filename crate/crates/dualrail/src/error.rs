//! Error types shared by the simulation layers.

use thiserror::Error;

/// Errors produced by state construction and circuit evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An occupation number lies outside `0..cutoff`.
    #[error("occupation {occupation} on mode {mode} exceeds cutoff {cutoff} (allowed 0..{cutoff})")]
    OccupationOutOfRange {
        mode: usize,
        occupation: u32,
        cutoff: usize,
    },

    /// A mode index does not exist in the basis.
    #[error("mode index {mode} out of range for {num_modes} modes")]
    ModeOutOfRange { mode: usize, num_modes: usize },

    /// The same mode was listed twice for a multi-mode operator.
    #[error("mode index {mode} listed more than once")]
    RepeatedMode { mode: usize },

    /// An operator's side does not match the expected dimension.
    #[error("dimension mismatch: operator is {got}x{got}, expected {expected}x{expected}")]
    DimensionMismatch { got: usize, expected: usize },

    /// A matrix failed the unitarity check.
    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    /// A Kraus set failed the completeness check.
    #[error("Kraus set violates completeness: max |sum K^dag K - I| = {deviation:.3e}")]
    KrausIncomplete { deviation: f64 },

    /// A state failed the normalization check.
    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    /// The Fock cutoff is too small to hold a coherent state to the
    /// requested tail bound.
    #[error(
        "cutoff {cutoff} too small for coherent amplitude |alpha| = {alpha_mag}: \
         truncated tail {tail:.3e} >= {bound:.1e}; need cutoff >= {required}"
    )]
    CutoffTooSmall {
        cutoff: usize,
        alpha_mag: f64,
        tail: f64,
        bound: f64,
        required: usize,
    },

    /// A mode list that must be nonempty was empty.
    #[error("mode list must be nonempty")]
    EmptyModeList,

    /// A coupling constant that must be nonnegative was negative.
    #[error("gamma must be nonnegative (got {0})")]
    NegativeGamma(f64),

    /// The requested basis is too large for dense evaluation.
    #[error("basis dimension {dim} exceeds the dense-evaluation budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    /// An oracle was requested for an unsupported input width.
    #[error("oracle width {n_inputs} unsupported (1..={max} inputs)")]
    UnsupportedOracleWidth { n_inputs: usize, max: usize },

    /// A truth table's length is not a power of two matching its width.
    #[error("truth table for {n_inputs} inputs needs {expected} entries, got {got}")]
    TruthTableLength {
        n_inputs: usize,
        expected: usize,
        got: usize,
    },

    /// A measurement outcome tuple has the wrong arity.
    #[error("outcome tuple has {got} entries, expected {expected}")]
    MalformedOutcome { got: usize, expected: usize },

    /// `read_answer` was called on a rejected outcome.
    #[error("answer requested for a rejected outcome: {0}")]
    RejectedOutcome(String),

    /// A machine configuration is invalid or unsupported.
    #[error("unsupported machine configuration: {0}")]
    UnsupportedConfig(String),

    /// Gate construction failed its own contract self-test.
    #[error("gate construction self-test failed: {0}")]
    ConstructionSelfTest(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
