//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown node label {label:?}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    UnknownNode { label: String, line: Option<usize> },

    #[error("{0} is empty")]
    EmptyInput(String),

    #[error("graph is not connected: {0}")]
    Disconnected(String),

    #[error("node {to:?} is unreachable from {from}")]
    Unreachable { from: String, to: String },

    #[error("node {label:?} assigned more than once (line {line})")]
    DuplicateAssignment { label: String, line: usize },

    #[error("node {label:?} has no cluster assignment")]
    MissingAssignment { label: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("problem too large for the exact oracle: {support} support nodes x {nodes} nodes exceeds {limit} node-support products")]
    ScaleGuard {
        support: usize,
        nodes: usize,
        limit: u64,
    },

    #[error("observation stream exhausted")]
    Exhausted,

    #[error("stale pipeline state: {0}")]
    StaleState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state file error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}
