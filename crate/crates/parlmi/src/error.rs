//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("{field} is not symmetric: relative asymmetry {asymmetry:.3e} exceeds 1e-12")]
    NotSymmetric { field: String, asymmetry: f64 },

    #[error("{field} is not positive definite")]
    NotPositiveDefinite { field: String },

    #[error("invalid value for {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("matrix market parse error in {path} (line {line}): {reason}")]
    MatrixMarket {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("malformed problem file {path}: {reason}")]
    MalformedProblem { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(
        "eigensolver did not converge after {iterations} iterations \
         (best value {best_value:.6e}, residual {residual:.3e})"
    )]
    EigNonConvergence {
        iterations: usize,
        best_value: f64,
        residual: f64,
    },

    #[error("numerically singular basis; basis columns {columns:?}")]
    SingularBasis { columns: Vec<usize> },

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error(
        "full-order solver did not converge after {iterations} iterations \
         (best alpha {best_alpha:.6e}, gap {gap:.3e})"
    )]
    SolverNonConvergence {
        iterations: usize,
        best_alpha: f64,
        gap: f64,
    },

    #[error(
        "reduced SDP infeasible at mu = {mu:?}; run the feasibility phase first \
         (or enlarge the initial exact set)"
    )]
    RsInfeasible { mu: Vec<f64> },

    #[error("unsupported model file version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("model fingerprint {model} does not match problem fingerprint {problem}")]
    FingerprintMismatch { model: String, problem: String },

    #[error("corrupt model file {path}: {reason}")]
    CorruptModel { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
