use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Function arity outside the supported range.
    #[error("arity {n} outside supported range 1..={max}")]
    ArityOutOfRange { n: u32, max: u32 },

    /// Input index at or beyond `2^n`.
    #[error("input {x:#x} out of range for a {n}-bit function")]
    InputOutOfRange { x: u32, n: u32 },

    /// A family parameter violates its precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Operation undefined for the all-zero function (empty spectrum).
    #[error("function is identically zero: {0}")]
    DegenerateFunction(&'static str),

    /// A simulation or enumeration would exceed its pinned resource limit.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Basis-permutation simulation hit a gate without classical semantics.
    #[error("gate {0} has no basis-permutation semantics")]
    NonClassicalGate(String),

    /// Text-format parse failure; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    /// A structural invariant that should hold by construction failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
