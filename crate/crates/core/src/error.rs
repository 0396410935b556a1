//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, channels, estimators and the
/// security-bound optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix trace is {trace:.12} (expected 1)")]
    NotNormalized { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator list is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("Bell state index {index} out of range 1..=4")]
    BellIndexOutOfRange { index: usize },

    #[error("{name} = {value} outside valid range [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("insufficient data: no counts for basis pair ({alice}, {bob})")]
    InsufficientData { alice: String, bob: String },

    #[error("correlation record is missing entry ({alice}, {bob})")]
    MissingCorrelator { alice: String, bob: String },

    #[error("record kind mismatch: {expected} correlations required")]
    WrongRecordKind { expected: &'static str },

    #[error("(Q, C) = ({q:.6}, {c:.6}) infeasible: C/2 exceeds (1-Q)^2 + Q^2 = {cap:.6}")]
    Infeasible { q: f64, c: f64, cap: f64 },

    #[error("transcript parse error at line {line}: {reason}")]
    TranscriptParse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
