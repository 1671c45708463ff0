use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by operator construction, parameter selection and evaluation.
#[derive(Debug, Error)]
pub enum PhimvError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected} rows, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is ill-posed: first product A*v is not finite")]
    IllPosedOperator,

    #[error("{stage}: non-finite value at term {term}")]
    Divergence { stage: &'static str, term: usize },

    #[error("{stage}: no convergence within {cap} terms")]
    NonConvergence { stage: &'static str, cap: usize },

    #[error("shift factor exp({exponent}) overflows")]
    ShiftOverflow { exponent: f64 },

    #[error("reference computation overflowed")]
    OracleOverflow,

    #[error("basis is not orthonormal: |U^T U - I| = {0:e}")]
    NotOrthonormal(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("matrix market parse error at line {line}: {msg}")]
    MtxParse { line: usize, msg: String },

    #[error("matrix market field `{0}` is not supported (real only)")]
    MtxField(String),

    #[error("integration aborted at t = {t}: {source}")]
    Integration {
        t: f64,
        #[source]
        source: Box<PhimvError>,
    },
}

pub type Result<T, E = PhimvError> = std::result::Result<T, E>;
