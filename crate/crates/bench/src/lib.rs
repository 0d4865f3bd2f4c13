//! Shared fixtures for the benchmarks.

use isummary_core::synth::{generate_synthetic_string, SyntheticSpec};
use isummary_core::{parse_query, Term, TermKind, WorkloadStore};

/// Synthetic log text with the default schema and `n` queries.
pub fn synthetic_log(n: usize) -> String {
    generate_synthetic_string(&SyntheticSpec {
        n_queries: n,
        ..SyntheticSpec::default()
    })
    .expect("valid spec")
}

pub fn store_from_log(log: &str) -> WorkloadStore {
    let queries = log
        .lines()
        .map(|l| parse_query(l).expect("synthetic queries parse"))
        .collect();
    WorkloadStore::from_queries(queries, 0)
}

/// The most frequently queried IRIs other than rdf:type.
pub fn popular_seeds(store: &WorkloadStore, count: usize) -> Vec<Term> {
    let mut terms: Vec<(&Term, usize)> = store
        .indexed_terms()
        .filter(|(t, _)| t.kind() == TermKind::Iri && *t != &Term::rdf_type())
        .map(|(t, ids)| (t, ids.len()))
        .collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    terms
        .into_iter()
        .take(count)
        .map(|(t, _)| t.clone())
        .collect()
}
