use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("proportion {value} at (n={n}, k={k}) is outside [0,1]")]
    InvalidProportion { n: usize, k: usize, value: f64 },

    #[error("distribution weights invalid: {reason}")]
    InvalidWeights { reason: String },

    #[error("rule table covers n ≤ {have} but n_max = {need}")]
    TableTooSmall { have: usize, need: usize },

    #[error("rule is not stratified: proportions vary in k")]
    NotStratified,

    #[error("unsupported rule for this operation: {reason}")]
    UnsupportedRule { reason: String },

    #[error("row length {got} does not match expected {expected}")]
    RowLengthMismatch { expected: usize, got: usize },

    #[error("partition is empty")]
    EmptyPartition,

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("sizes differ: partition n = {lhs}, distribution n = {rhs}")]
    SizeMismatch { lhs: usize, rhs: usize },

    #[error("path enumeration limited to n ≤ {max}, got {got}")]
    TooLarge { max: usize, got: usize },

    #[error("step variance is zero; bulk scaling undefined")]
    DegenerateVariance,

    #[error("alpha = {alpha} outside attainable open interval ({lo}, {hi})")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },

    #[error("x = {x} outside solvable range ({lo}, {hi})")]
    XOutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("argument {value} outside domain {domain}")]
    DomainError { value: f64, domain: &'static str },

    #[error("bad grid: {reason}")]
    BadGrid { reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
