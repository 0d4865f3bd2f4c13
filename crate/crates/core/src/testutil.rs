//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::term::{Term, TriplePattern, XSD_INTEGER};
use crate::workload::{parse_query, ParsedQuery, WorkloadStore};

pub fn node_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => (0..4usize).prop_map(|i| Term::variable(format!("v{i}"))),
        3 => (0..4usize).prop_map(|i| Term::iri(format!("r{i}"))),
        2 => (0..3usize).prop_map(|i| Term::iri(format!("C{i}"))),
        1 => Just(Term::blank("b0")),
    ]
}

pub fn object_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        8 => node_term(),
        1 => prop_oneof![
            Just(Term::literal("plain")),
            Just(Term::literal("with \"quotes\" and\nnewline")),
            Just(Term::lang_literal("hallo", "de")),
            Just(Term::typed_literal("7", XSD_INTEGER)),
        ],
    ]
}

pub fn pattern() -> impl Strategy<Value = TriplePattern> {
    let typed = (node_term(), 0..3usize).prop_map(|(s, c)| {
        TriplePattern::new(s, Term::rdf_type(), Term::iri(format!("C{c}"))).unwrap()
    });
    let edge = (node_term(), 0..3usize, object_term())
        .prop_map(|(s, p, o)| TriplePattern::new(s, Term::iri(format!("p{p}")), o).unwrap());
    let open = (node_term(), object_term())
        .prop_map(|(s, o)| TriplePattern::new(s, Term::variable("pv"), o).unwrap());
    prop_oneof![3 => typed, 6 => edge, 1 => open]
}

pub fn query_text(patterns: &[TriplePattern]) -> String {
    let body: Vec<String> = patterns.iter().map(ToString::to_string).collect();
    format!("SELECT * WHERE {{ {} }}", body.join(" "))
}

pub fn query() -> impl Strategy<Value = ParsedQuery> {
    prop::collection::vec(pattern(), 1..6).prop_map(|p| parse_query(&query_text(&p)).unwrap())
}

pub fn store(max_queries: usize) -> impl Strategy<Value = WorkloadStore> {
    prop::collection::vec(query(), 1..=max_queries).prop_map(|q| WorkloadStore::from_queries(q, 0))
}

/// Concrete terms a strategy above can produce, for picking seeds.
pub fn vocabulary() -> Vec<Term> {
    let mut v: Vec<Term> = (0..4).map(|i| Term::iri(format!("r{i}"))).collect();
    v.extend((0..3).map(|i| Term::iri(format!("C{i}"))));
    v.extend((0..3).map(|i| Term::iri(format!("p{i}"))));
    v.push(Term::literal("plain"));
    v.push(Term::lang_literal("hallo", "de"));
    v
}
