use thiserror::Error;

/// Errors raised by kernel construction, norm computation and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    #[error("factor does not reproduce the matrix: M != V V^T at ({row}, {col})")]
    FactorMismatch { row: usize, col: usize },

    #[error("kernel matrix carries no V factor")]
    MissingFactor,

    #[error("factor column {index} out of range (factor has {columns} columns)")]
    FactorIndex { index: usize, columns: usize },

    #[error("bump bandwidth must lie in (0, 1/2), got {0}")]
    InvalidEpsilon(String),

    #[error("dimension {n} exceeds the enumeration cap {cap}; use the bounds operation instead")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("input domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid bounded input: {0}")]
    InvalidInput(String),

    #[error("kernel has unbounded support; cap the number of blocks first")]
    UnboundedSupport,

    #[error("invalid block layout: {0}")]
    InvalidBlocks(String),

    #[error("Hadamard order exponent {m} exceeds the materialization cap {cap}")]
    HadamardCap { m: u32, cap: u32 },

    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("duplicate sample point {0}")]
    DuplicatePoints(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
