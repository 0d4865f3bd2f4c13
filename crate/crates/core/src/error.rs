use std::io;

use crate::workload::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("workload contains no parsable queries")]
    EmptyWorkload,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no query in the workload contains the seed node(s)")]
    NoRelevantQueries,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("insufficient workload: {0}")]
    InsufficientWorkload(String),
    #[error("no connected subset of the requested size contains all terminals")]
    Infeasible,
    #[error("exact search supports at most {limit} nodes, got {nodes}")]
    SizeLimit { nodes: usize, limit: usize },
    #[error("target nodes are not connected")]
    Disconnected,
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable name used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Io(_) => "IoError",
            Error::EmptyWorkload => "EmptyWorkload",
            Error::Parse(_) => "ParseError",
            Error::NoRelevantQueries => "NoRelevantQueries",
            Error::InvalidRequest(_) => "InvalidRequest",
            Error::InsufficientWorkload(_) => "InsufficientWorkload",
            Error::Infeasible => "Infeasible",
            Error::SizeLimit { .. } => "SizeLimit",
            Error::Disconnected => "Disconnected",
            Error::MalformedInstance(_) => "MalformedInstance",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
