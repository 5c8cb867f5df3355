use thiserror::Error;

use crate::linalg::Vector;

/// Errors produced by the QVI library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("not strongly monotone: mu = {mu} <= 0")]
    NotStronglyMonotone { mu: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lambda condition violated: lambda + sqrt(1 - mu^2/L^2) = {value} is not < 1")]
    LambdaCondition { value: f64 },

    #[error("gamma = {gamma} is outside the admissible interval ({lo}, {hi})")]
    GammaOutsideInterval { gamma: f64, lo: f64, hi: f64 },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("Dykstra projection did not converge after {iterations} sweeps (last change {residual:e})")]
    DykstraNotConverged {
        iterations: usize,
        residual: f64,
        last: Vector,
    },

    #[error("feasible set K(x) is unbounded; use the natural residual instead")]
    UnboundedSet,

    #[error("reference oracle made no contraction progress in {iterations} iterations")]
    OracleStalled { iterations: usize },

    #[error("EOC undefined: no window of three step norms inside (0, 1)")]
    EocUndefined,

    #[error("trace too short: {len} records, need at least {needed}")]
    TraceTooShort { len: usize, needed: usize },

    #[error("empty instance set")]
    EmptyInstanceSet,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid problem `{name}`: {reason}")]
    InvalidProblem { name: String, reason: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
