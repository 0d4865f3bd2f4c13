//! Personalized knowledge-graph summaries mined from SPARQL query logs.
//!
//! Given a query workload, one or more seed terms and a node budget `k`,
//! [`summarize`] picks the `k` nodes that co-occur most often with the seeds
//! in past queries and links them with the most frequent shortest paths
//! found inside those queries. [`coverage`](coverage::coverage) scores a
//! summary against held-out queries, and [`steiner`] holds a small exact
//! solver plus the cheapest-insertion heuristic used to check the
//! approximation behaviour on toy graphs.

pub mod coverage;
pub mod error;
pub mod graph;
pub mod output;
pub mod rng;
pub mod steiner;
pub mod summarizer;
pub mod synth;
pub mod term;
pub mod workload;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use graph::{build_graph, Direction, PathSignature, QueryGraph, Step};
pub use summarizer::{summarize, Strategy, Summary, SummaryRequest, Warning};
pub use term::{Term, TermKind, Triple, TriplePattern};
pub use workload::{
    load_workload, parse_query, LogFormat, ParseOptions, ParsedQuery, QueryId, WorkloadStore,
};
