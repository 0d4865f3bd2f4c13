//! Per-query graphs and canonical shortest paths.
//!
//! A query's basic graph pattern becomes an undirected labeled multigraph.
//! Typed variables are collapsed into their class: a pattern
//! `?v rdf:type C` disappears and `?v` is relabeled `C` everywhere, so
//! queries talking about the same classes connect the same nodes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::term::{Term, TriplePattern};
use crate::workload::{ParsedQuery, QueryId};

/// Edge as written in the query: `subject --predicate--> object`, with
/// endpoints given as indices into [`QueryGraph::nodes`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub subject: usize,
    pub predicate: Term,
    pub object: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGraph {
    nodes: Vec<Term>,
    edges: Vec<Edge>,
    source: QueryId,
}

impl QueryGraph {
    /// Sorted, de-duplicated node terms.
    pub fn nodes(&self) -> &[Term] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source_query_id(&self) -> QueryId {
        self.source
    }

    pub fn node_index(&self, term: &Term) -> Option<usize> {
        self.nodes.binary_search(term).ok()
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.node_index(term).is_some()
    }

    /// Edge endpoints resolved to terms.
    pub fn edge_terms<'a>(&'a self, edge: &'a Edge) -> (&'a Term, &'a Term, &'a Term) {
        (
            &self.nodes[edge.subject],
            &edge.predicate,
            &self.nodes[edge.object],
        )
    }

    /// Non-variable nodes: the node denominator of the coverage metric.
    pub fn concrete_nodes(&self) -> impl Iterator<Item = &Term> + '_ {
        self.nodes.iter().filter(|t| t.is_concrete())
    }

    /// Edges whose predicate is concrete; endpoints may be variables.
    pub fn concrete_edges(&self) -> impl Iterator<Item = (&Term, &Term, &Term)> + '_ {
        self.edges
            .iter()
            .filter(|e| e.predicate.is_concrete())
            .map(|e| self.edge_terms(e))
    }

    /// Finds the minimum-hop path between two terms and returns its
    /// canonical signature. Among equally short paths the lexicographically
    /// least signature wins. Only edges with a concrete predicate are
    /// traversed. Returns `None` when either term is absent or the two are
    /// disconnected.
    pub fn shortest_path(&self, x: &Term, y: &Term) -> Option<PathSignature> {
        if x == y {
            return None;
        }
        let (start, end) = if x <= y { (x, y) } else { (y, x) };
        let start_idx = self.node_index(start)?;
        let end_idx = self.node_index(end)?;

        let adjacency = self.adjacency();
        let dist = bfs_distances(&adjacency, end_idx);
        let total = dist[start_idx]?;

        let mut frontier = vec![start_idx];
        let mut steps = Vec::with_capacity(total);
        let mut renamer = Renamer::default();
        for _ in 0..total {
            let mut best: Option<(Term, Direction, Term)> = None;
            let mut next: BTreeSet<usize> = BTreeSet::new();
            for &u in &frontier {
                let du = dist[u].expect("frontier nodes lie on shortest paths");
                for &(v, edge_idx) in &adjacency[u] {
                    if dist[v] != Some(du - 1) {
                        continue;
                    }
                    let edge = &self.edges[edge_idx];
                    let direction = if edge.subject == u {
                        Direction::Forward
                    } else {
                        Direction::Backward
                    };
                    let key = (
                        edge.predicate.clone(),
                        direction,
                        renamer.peek(&self.nodes[v]),
                    );
                    match &best {
                        Some(b) if key > *b => {}
                        Some(b) if key == *b => {
                            next.insert(v);
                        }
                        _ => {
                            best = Some(key);
                            next.clear();
                            next.insert(v);
                        }
                    }
                }
            }
            let (predicate, direction, waypoint) = best.expect("distance guarantees a successor");
            if !waypoint.is_concrete() {
                renamer.advance();
            }
            steps.push(Step {
                predicate,
                direction,
                waypoint,
            });
            frontier = next.into_iter().collect();
        }
        Some(PathSignature {
            start: start.clone(),
            end: end.clone(),
            steps,
        })
    }

    /// Node -> (neighbour, edge index), traversable edges only.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if !e.predicate.is_concrete() || e.subject == e.object {
                continue;
            }
            adjacency[e.subject].push((e.object, i));
            adjacency[e.object].push((e.subject, i));
        }
        adjacency
    }
}

fn bfs_distances(adjacency: &[Vec<(usize, usize)>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or_default();
        for &(v, _) in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Builds the type-collapsed graph of a query.
///
/// A variable with exactly one `rdf:type` pattern to a concrete IRI is
/// relabeled by that class and the pattern is absorbed. A variable with
/// several such patterns takes the least class; its other type patterns
/// stay as ordinary edges from that class.
pub fn build_graph(query: &ParsedQuery) -> QueryGraph {
    build_graph_from_patterns(&query.patterns, query.id)
}

pub fn build_graph_from_patterns(patterns: &[TriplePattern], source: QueryId) -> QueryGraph {
    let rdf_type = Term::rdf_type();
    let mut classes: BTreeMap<&Term, BTreeSet<&Term>> = BTreeMap::new();
    for p in patterns {
        if p.predicate == rdf_type && !p.subject.is_concrete() && p.object.is_iri() {
            classes.entry(&p.subject).or_default().insert(&p.object);
        }
    }
    let relabel: BTreeMap<&Term, &Term> = classes
        .iter()
        .map(|(v, cs)| (*v, *cs.iter().next().expect("non-empty class set")))
        .collect();
    let map = |t: &Term| -> Term { relabel.get(t).map_or_else(|| t.clone(), |c| (*c).clone()) };

    let mut triples: BTreeSet<(Term, Term, Term)> = BTreeSet::new();
    let mut nodes: BTreeSet<Term> = BTreeSet::new();
    for p in patterns {
        if p.predicate == rdf_type && relabel.get(&p.subject) == Some(&&p.object) {
            // Absorbed, but the class itself is still a node.
            nodes.insert(p.object.clone());
            continue;
        }
        let s = map(&p.subject);
        let o = map(&p.object);
        nodes.insert(s.clone());
        nodes.insert(o.clone());
        triples.insert((s, p.predicate.clone(), o));
    }
    let nodes: Vec<Term> = nodes.into_iter().collect();
    let index = |t: &Term| nodes.binary_search(t).expect("endpoint registered as node");
    let mut edges: Vec<Edge> = triples
        .into_iter()
        .map(|(s, p, o)| Edge {
            subject: index(&s),
            predicate: p,
            object: index(&o),
        })
        .collect();
    edges.sort();
    QueryGraph {
        nodes,
        edges,
        source,
    }
}

/// Direction of a path step relative to the triple as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// The previous node is the subject.
    Forward,
    /// The previous node is the object.
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub predicate: Term,
    pub direction: Direction,
    pub waypoint: Term,
}

/// Canonical form of a path between two concrete terms.
///
/// `start` is the lesser endpoint, steps walk from `start` to `end`, the
/// last waypoint equals `end`, and non-concrete waypoints are renamed
/// `v0`, `v1`, ... in walk order. Equal paths therefore compare equal
/// regardless of the direction they were found in or the query's own
/// variable names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSignature {
    pub start: Term,
    pub end: Term,
    pub steps: Vec<Step>,
}

impl PathSignature {
    /// Canonicalizes an arbitrary walk `nodes[0] -links[0]- nodes[1] ...`.
    ///
    /// `links[i]` holds the predicate and direction of the hop from
    /// `nodes[i]` to `nodes[i + 1]`.
    pub fn from_walk(nodes: &[Term], links: &[(Term, Direction)]) -> Self {
        assert_eq!(nodes.len(), links.len() + 1, "walk shape");
        let (nodes, links): (Vec<Term>, Vec<(Term, Direction)>) = if nodes.last() < nodes.first() {
            (
                nodes.iter().rev().cloned().collect(),
                links
                    .iter()
                    .rev()
                    .map(|(p, d)| (p.clone(), d.flip()))
                    .collect(),
            )
        } else {
            (nodes.to_vec(), links.to_vec())
        };
        let mut renamer = Renamer::default();
        let steps = links
            .into_iter()
            .zip(&nodes[1..])
            .map(|((predicate, direction), node)| {
                let waypoint = renamer.peek(node);
                if !node.is_concrete() {
                    renamer.advance();
                }
                Step {
                    predicate,
                    direction,
                    waypoint,
                }
            })
            .collect();
        PathSignature {
            start: nodes[0].clone(),
            end: nodes[nodes.len() - 1].clone(),
            steps,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Node sequence from `start` to `end`.
    pub fn nodes(&self) -> impl Iterator<Item = &Term> + '_ {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.waypoint))
    }
}

#[derive(Default)]
struct Renamer {
    next: usize,
}

impl Renamer {
    fn peek(&self, term: &Term) -> Term {
        if term.is_concrete() {
            term.clone()
        } else {
            Term::variable(format!("v{}", self.next))
        }
    }

    fn advance(&mut self) {
        self.next += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::parse_query;

    fn graph(q: &str) -> QueryGraph {
        build_graph(&parse_query(q).unwrap())
    }

    fn iri(s: &str) -> Term {
        Term::iri(s)
    }

    const Q3: &str = r#"SELECT ?x ?y WHERE {?x a Person. ?y a Organization. ?y affiliatedOf ?x. ?y orgName "FORTH".}"#;

    #[test]
    fn q3_collapses_types() {
        let g = graph(Q3);
        assert_eq!(
            g.nodes(),
            &[iri("Organization"), iri("Person"), Term::literal("FORTH")]
        );
        let edges: Vec<_> = g.concrete_edges().collect();
        assert_eq!(
            edges,
            vec![
                (&iri("Organization"), &iri("affiliatedOf"), &iri("Person")),
                (
                    &iri("Organization"),
                    &iri("orgName"),
                    &Term::literal("FORTH")
                ),
            ]
        );
        assert_eq!(g.concrete_nodes().count(), 3);
    }

    #[test]
    fn single_type_pattern_leaves_lone_class() {
        let g = graph("SELECT ?y WHERE {?y a Organization.}");
        assert_eq!(g.nodes(), &[iri("Organization")]);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn untyped_variables_stay() {
        let g = graph("SELECT * WHERE {?x p ?y. ?y q ?z.}");
        assert_eq!(g.nodes().len(), 3);
        assert_eq!(g.concrete_nodes().count(), 0);
        assert_eq!(g.concrete_edges().count(), 2);
    }

    #[test]
    fn multi_typed_variable_keeps_least_class() {
        let g = graph("SELECT * WHERE {?x a Zeta. ?x a Alpha. ?x knows Bob.}");
        let edges: Vec<_> = g.concrete_edges().collect();
        assert!(edges.contains(&(&iri("Alpha"), &Term::rdf_type(), &iri("Zeta"))));
        assert!(edges.contains(&(&iri("Alpha"), &iri("knows"), &iri("Bob"))));
        assert_eq!(edges.len(), 2);
    }

    #[test]
    fn variable_predicates_not_concrete_edges() {
        let g = graph("SELECT * WHERE {<a> ?p <b>. <a> q <c>}");
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.concrete_edges().count(), 1);
        assert!(g.shortest_path(&iri("a"), &iri("b")).is_none());
    }

    #[test]
    fn single_edge_path() {
        let g = graph(Q3);
        let p = g
            .shortest_path(&iri("Person"), &iri("Organization"))
            .unwrap();
        assert_eq!(p.start, iri("Organization"));
        assert_eq!(p.end, iri("Person"));
        assert_eq!(
            p.steps,
            vec![Step {
                predicate: iri("affiliatedOf"),
                direction: Direction::Forward,
                waypoint: iri("Person"),
            }]
        );
    }

    #[test]
    fn two_hop_path_through_organization() {
        let g = graph(Q3);
        let p = g
            .shortest_path(&Term::literal("FORTH"), &iri("Person"))
            .unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.start, iri("Person"));
        assert_eq!(p.steps[0].waypoint, iri("Organization"));
        assert_eq!(p.steps[0].direction, Direction::Backward);
        assert_eq!(p.steps[1].direction, Direction::Forward);
        assert_eq!(
            p,
            g.shortest_path(&iri("Person"), &Term::literal("FORTH"))
                .unwrap()
        );
    }

    #[test]
    fn absent_node_has_no_path() {
        let g = graph(Q3);
        assert!(g
            .shortest_path(&iri("Person"), &iri("Publication"))
            .is_none());
    }

    #[test]
    fn variables_renamed_positionally() {
        let a = graph("SELECT * WHERE { <s> p ?foo . ?foo q <t> }");
        let b = graph("SELECT * WHERE { <s> p ?bar . ?bar q <t> }");
        let pa = a.shortest_path(&iri("s"), &iri("t")).unwrap();
        assert_eq!(pa, b.shortest_path(&iri("t"), &iri("s")).unwrap());
        assert_eq!(pa.steps[0].waypoint, Term::variable("v0"));
    }

    #[test]
    fn tie_broken_by_least_signature() {
        let g = graph("SELECT * WHERE { <s> zz ?a . ?a p <t> . <s> aa ?b . ?b p <t> }");
        let p = g.shortest_path(&iri("s"), &iri("t")).unwrap();
        assert_eq!(p.steps[0].predicate, iri("aa"));
    }

    #[test]
    fn from_walk_canonicalizes() {
        let walk = PathSignature::from_walk(
            &[iri("z"), Term::variable("q"), iri("a")],
            &[
                (iri("p1"), Direction::Forward),
                (iri("p2"), Direction::Backward),
            ],
        );
        assert_eq!(walk.start, iri("a"));
        assert_eq!(walk.steps[0].predicate, iri("p2"));
        assert_eq!(walk.steps[0].direction, Direction::Forward);
        assert_eq!(walk.steps[0].waypoint, Term::variable("v0"));
        assert_eq!(walk.steps[1].direction, Direction::Backward);
        assert_eq!(walk.steps[1].waypoint, iri("z"));
    }
}
