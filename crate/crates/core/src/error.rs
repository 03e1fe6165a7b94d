//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the coding, latency and
/// experiment layers. Variants carry enough context to name the
/// violated constraint in messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (left {left_rows}x{left_cols}, right {right_rows}x{right_cols})")]
    DimensionMismatch {
        context: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("ring mismatch: operands use different scalar rings")]
    RingMismatch,

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("division unavailable over this ring; use a prime field")]
    DivisionUnsupported,

    #[error("scalar {0} is not invertible")]
    NotInvertible(i128),

    #[error("divisibility violation: {constraint}")]
    Divisibility { constraint: String },

    #[error("source block index {index} out of range 1..={max}")]
    BlockIndexOutOfRange { index: usize, max: usize },

    #[error("source block {0} missing from assembly input")]
    MissingBlock(usize),

    #[error("source block {0} supplied more than once")]
    DuplicateBlock(usize),

    #[error("equation degree {degree} exceeds cap {cap}")]
    DegreeExceeded { degree: usize, cap: usize },

    #[error("source index {index} outside 1..={max}")]
    SourceOutOfRange { index: usize, max: usize },

    #[error("sources {missing:?} are covered by no equation")]
    CoverageGap { missing: Vec<usize> },

    #[error("degree condition violated: {detail}")]
    DegreeCondition { detail: String },

    #[error("blocklength {n} exceeds the maximum {max} for these parameters")]
    BlocklengthExceeded { n: usize, max: usize },

    #[error("code search exhausted its budget after {tried} candidates")]
    SearchExhausted { tried: usize },

    #[error("asymptotic code construction failed after {attempts} repair rounds ({failures} sampled-subset failures)")]
    ConstructionExhausted { attempts: usize, failures: usize },

    #[error("subset enumeration would examine more than {limit} subsets; use sampled validation")]
    ExhaustionLimit { limit: u64 },

    #[error("conflicting resolutions for source {index} during peeling")]
    InconsistentPeel { index: usize },

    #[error("need at least {needed} results, got {got}")]
    InsufficientResults { needed: usize, got: usize },

    #[error("evaluation point {0} appears more than once")]
    RepeatedPoint(i128),

    #[error("latency precondition violated: {detail}")]
    LatencyPrecondition { detail: String },

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),

    #[error("scenario field '{field}': {detail}")]
    Scenario { field: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
