use thiserror::Error;

use crate::client::AuthReport;

pub type Result<T> = std::result::Result<T, SpdcError>;

#[derive(Debug, Error)]
pub enum SpdcError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("unsupported rotation angle {0} (expected 90, 180, 270 or 360)")]
    UnsupportedRotation(u32),

    #[error("side {side} cannot be split across {servers} servers with block size > 1; pad the matrix first")]
    NotPartitionable { side: usize, servers: usize },

    #[error("singular pivot at index {index} (value {pivot:e})")]
    SingularPivot { index: usize, pivot: f64 },

    #[error("key generation failed: {0}")]
    KeyGen(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("protocol violation at server {server}: {message}")]
    ProtocolViolation { server: usize, message: String },

    #[error("server {server} reported failure: {message}")]
    ServerFailure { server: usize, message: String },

    #[error("simulation deadlocked with results missing from {missing:?}\n{dump}")]
    Deadlock { missing: Vec<usize>, dump: String },

    #[error("incomplete result set, missing: {}", fmt_servers(.missing))]
    IncompleteResults { missing: Vec<usize> },

    #[error("result authentication failed ({:?}: |Q| = {:e} > eps = {:e})", .0.method, .0.value, .0.epsilon)]
    Tampered(Box<AuthReport>),

    #[error("singular pivot persisted after {attempts} attempts")]
    RetriesExhausted { attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_servers(ids: &[usize]) -> String {
    ids.iter().map(|i| format!("S_{i}")).collect::<Vec<_>>().join(", ")
}
