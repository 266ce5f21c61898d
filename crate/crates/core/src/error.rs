use thiserror::Error;

/// Errors produced by the simulator and the bound evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid group parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: u64, bound: u64 },

    #[error("epsilon {0} outside (0, sqrt(2)]")]
    EpsilonOutOfRange(f64),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("M = 2^{exponent} exceeds the memory guard of 2^{limit}")]
    MemoryGuard { exponent: u32, limit: u32 },

    #[error("no feasible (m, l) found up to m = {0}")]
    Infeasible(u32),

    #[error("malformed state file: {0}")]
    StateFormat(String),

    #[error("empty verification grid")]
    EmptyGrid,

    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
