//! Workload-driven summary construction.
//!
//! Node weights come from the workload: a candidate's weight is the number
//! of seed-relevant queries it appears in. The top `k - λ` candidates are
//! then attached one at a time, each through the path that most often
//! links it to an already-selected node inside those same queries.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Direction, PathSignature};
use crate::rng::Rng;
use crate::term::{Term, Triple};
use crate::workload::{QueryId, Side, WorkloadStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[serde(rename = "isummary")]
    ISummary,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::ISummary, Strategy::Random];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ISummary => "isummary",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isummary" => Ok(Strategy::ISummary),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidRequest(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRequest {
    pub seeds: Vec<Term>,
    pub k: usize,
    pub strategy: Strategy,
    /// Only used by [`Strategy::Random`].
    pub random_seed: u64,
}

impl SummaryRequest {
    pub fn new(seeds: Vec<Term>, k: usize, strategy: Strategy) -> Self {
        SummaryRequest {
            seeds,
            k,
            strategy,
            random_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidRequest(
                "at least one seed is required".into(),
            ));
        }
        if self.seeds.len() > self.k {
            return Err(Error::InvalidRequest(format!(
                "{} seeds exceed the budget k={}",
                self.seeds.len(),
                self.k
            )));
        }
        if let Some(t) = self.seeds.iter().find(|t| !t.is_concrete()) {
            return Err(Error::InvalidRequest(format!(
                "seed {t} is not a concrete term"
            )));
        }
        let distinct: HashSet<&Term> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::InvalidRequest("duplicate seeds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeEntry {
    pub term: Term,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Warning {
    /// A selected node could not be linked to the summary.
    IsolatedNode { term: Term },
    /// A path variable had no concrete candidate; a fresh blank node stands in.
    UnresolvedVariable { blank: Term },
    /// A path variable was replaced by a term mined from the workload.
    MinedResource { term: Term },
    /// A concrete node on a linking path that is not one of the selected nodes.
    IntermediateNode { term: Term },
    /// Fewer candidates than the budget asked for.
    BudgetShortfall { requested: usize, selected: usize },
    /// No query holds all seeds; queries holding any seed were used instead.
    MultiSeedFallback { queries: usize },
}

/// A personalized summary. Serializes as the JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub seeds: Vec<Term>,
    pub k: usize,
    pub strategy: Strategy,
    /// Seeds first, then selected nodes in selection order.
    pub nodes: Vec<NodeEntry>,
    pub triples: Vec<Triple>,
    pub warnings: Vec<Warning>,
}

impl Summary {
    /// Node terms plus every subject and object of the summary triples.
    pub fn all_terms(&self) -> HashSet<&Term> {
        let mut terms: HashSet<&Term> = self.nodes.iter().map(|n| &n.term).collect();
        for t in &self.triples {
            terms.insert(&t.subject);
            terms.insert(&t.object);
        }
        terms
    }

    pub fn total_frequency(&self) -> usize {
        self.nodes.iter().map(|n| n.frequency).sum()
    }
}

/// Candidate nodes of the relevant queries ranked by document frequency
/// (descending), ties by term order.
fn ranked_candidates(
    store: &WorkloadStore,
    relevant: &[QueryId],
    exclude: &[Term],
) -> Vec<NodeEntry> {
    let mut freq: HashMap<&Term, usize> = HashMap::new();
    for &id in relevant {
        for term in store.graph(id).concrete_nodes() {
            *freq.entry(term).or_default() += 1;
        }
    }
    let mut ranked: Vec<NodeEntry> = freq
        .into_iter()
        .filter(|(t, _)| !exclude.contains(t))
        .map(|(term, frequency)| NodeEntry {
            term: term.clone(),
            frequency,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.term.cmp(&b.term))
    });
    ranked
}

/// The `count` most frequent concrete nodes of the relevant queries'
/// collapsed graphs, skipping `exclude`.
pub fn select_top_nodes(
    store: &WorkloadStore,
    relevant: &[QueryId],
    count: usize,
    exclude: &[Term],
) -> Vec<NodeEntry> {
    let mut ranked = ranked_candidates(store, relevant, exclude);
    ranked.truncate(count);
    ranked
}

/// Most frequent shortest path linking `x` to any visited node, counted
/// over the relevant queries that mention both. Ties go to the shorter
/// path, then the least signature.
pub fn link(
    store: &WorkloadStore,
    relevant: &[QueryId],
    x: &Term,
    visited: &[Term],
) -> Option<PathSignature> {
    let mut tally: HashMap<PathSignature, usize> = HashMap::new();
    for y in visited {
        let ids = store.filter_within(relevant, &[x.clone(), y.clone()]);
        let paths: Vec<PathSignature> = ids
            .par_iter()
            .filter_map(|&id| store.graph(id).shortest_path(x, y))
            .collect();
        for path in paths {
            *tally.entry(path).or_default() += 1;
        }
    }
    tally
        .into_iter()
        .min_by(|(pa, fa), (pb, fb)| {
            fb.cmp(fa)
                .then_with(|| pa.len().cmp(&pb.len()))
                .then_with(|| pa.cmp(pb))
        })
        .map(|(path, _)| path)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub triples: Vec<Triple>,
    pub warnings: Vec<Warning>,
}

/// Turns a path into summary triples, replacing each variable waypoint
/// with the concrete term the whole workload most often places in the same
/// structural positions (same predicate, same side). Candidates matching
/// more of the waypoint's positions win, then higher total frequency, then
/// term order. Waypoints without candidates become fresh blank nodes
/// `_:u<n>`, numbered from `next_blank`.
pub fn resolve_variables(
    path: &PathSignature,
    store: &WorkloadStore,
    next_blank: &mut usize,
) -> Resolution {
    let nodes: Vec<&Term> = path.nodes().collect();
    let mut resolved: Vec<Term> = Vec::with_capacity(nodes.len());
    let mut warnings = Vec::new();

    for (i, node) in nodes.iter().enumerate() {
        if node.is_concrete() {
            resolved.push((*node).clone());
            continue;
        }
        let mut positions = Vec::with_capacity(2);
        if i > 0 {
            let step = &path.steps[i - 1];
            let side = match step.direction {
                Direction::Forward => Side::Object,
                Direction::Backward => Side::Subject,
            };
            positions.push((&step.predicate, side));
        }
        if let Some(step) = path.steps.get(i) {
            let side = match step.direction {
                Direction::Forward => Side::Subject,
                Direction::Backward => Side::Object,
            };
            positions.push((&step.predicate, side));
        }
        let needs_subject = positions.iter().any(|(_, s)| *s == Side::Subject);

        let mut scores: BTreeMap<&Term, (usize, usize)> = BTreeMap::new();
        for (predicate, side) in &positions {
            if let Some(counts) = store.position_counts(predicate, *side) {
                for (term, &n) in counts {
                    if needs_subject && term.is_literal() {
                        continue;
                    }
                    let entry = scores.entry(term).or_default();
                    entry.0 += 1;
                    entry.1 += n;
                }
            }
        }
        // Ascending term order; only a strictly better score replaces the best.
        let best =
            scores
                .into_iter()
                .fold(
                    None::<(&Term, (usize, usize))>,
                    |best, (term, score)| match best {
                        Some((_, b)) if b >= score => best,
                        _ => Some((term, score)),
                    },
                );
        match best {
            Some((term, _)) => {
                warnings.push(Warning::MinedResource { term: term.clone() });
                resolved.push(term.clone());
            }
            None => {
                let blank = Term::blank(format!("u{}", *next_blank));
                *next_blank += 1;
                warnings.push(Warning::UnresolvedVariable {
                    blank: blank.clone(),
                });
                resolved.push(blank);
            }
        }
    }

    let triples = path
        .steps
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let (from, to) = (resolved[i].clone(), resolved[i + 1].clone());
            match step.direction {
                Direction::Forward => Triple::new(from, step.predicate.clone(), to),
                Direction::Backward => Triple::new(to, step.predicate.clone(), from),
            }
        })
        .collect();
    Resolution { triples, warnings }
}

/// Accumulates triples (as a set, first occurrence wins) and warnings.
struct Builder {
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    warnings: Vec<Warning>,
    next_blank: usize,
}

impl Builder {
    fn new() -> Self {
        Builder {
            triples: Vec::new(),
            seen: HashSet::new(),
            warnings: Vec::new(),
            next_blank: 0,
        }
    }

    fn add_path(&mut self, path: &PathSignature, store: &WorkloadStore) {
        let resolution = resolve_variables(path, store, &mut self.next_blank);
        for t in resolution.triples {
            if self.seen.insert(t.clone()) {
                self.triples.push(t);
            }
        }
        self.warnings.extend(resolution.warnings);
    }
}

/// Builds a summary for the request's seeds from the workload.
pub fn summarize(store: &WorkloadStore, req: &SummaryRequest) -> Result<Summary> {
    req.validate()?;
    let mut builder = Builder::new();

    let mut relevant = store.filter(&req.seeds);
    if relevant.is_empty() && req.seeds.len() > 1 {
        let mut union: Vec<QueryId> = req
            .seeds
            .iter()
            .flat_map(|s| store.postings(s).iter().copied())
            .collect();
        union.sort_unstable();
        union.dedup();
        relevant = union;
        if !relevant.is_empty() {
            builder.warnings.push(Warning::MultiSeedFallback {
                queries: relevant.len(),
            });
        }
    }
    if relevant.is_empty() {
        return Err(Error::NoRelevantQueries);
    }

    let budget = req.k - req.seeds.len();
    let mut nodes: Vec<NodeEntry> = req
        .seeds
        .iter()
        .map(|s| NodeEntry {
            term: s.clone(),
            frequency: relevant.len(),
        })
        .collect();

    let selected = match req.strategy {
        Strategy::ISummary => {
            let top = select_top_nodes(store, &relevant, budget, &req.seeds);
            let mut visited = vec![req.seeds[0].clone()];
            let to_link = req.seeds[1..]
                .iter()
                .cloned()
                .chain(top.iter().map(|n| n.term.clone()));
            for x in to_link {
                match link(store, &relevant, &x, &visited) {
                    Some(path) => builder.add_path(&path, store),
                    None => builder
                        .warnings
                        .push(Warning::IsolatedNode { term: x.clone() }),
                }
                visited.push(x);
            }
            top
        }
        Strategy::Random => random_selection(store, &relevant, budget, req, &mut builder),
    };

    if selected.len() < budget {
        builder.warnings.push(Warning::BudgetShortfall {
            requested: budget,
            selected: selected.len(),
        });
    }
    nodes.extend(selected);

    let node_terms: HashSet<&Term> = nodes.iter().map(|n| &n.term).collect();
    let mined: HashSet<Term> = builder
        .warnings
        .iter()
        .filter_map(|w| match w {
            Warning::MinedResource { term } => Some(term.clone()),
            _ => None,
        })
        .collect();
    let mut intermediate = Vec::new();
    let mut reported = HashSet::new();
    for t in &builder.triples {
        for term in [&t.subject, &t.object] {
            if term.is_concrete()
                && !node_terms.contains(term)
                && !mined.contains(term)
                && reported.insert(term.clone())
            {
                intermediate.push(Warning::IntermediateNode { term: term.clone() });
            }
        }
    }
    builder.warnings.extend(intermediate);

    Ok(Summary {
        seeds: req.seeds.clone(),
        k: req.k,
        strategy: req.strategy,
        nodes,
        triples: builder.triples,
        warnings: builder.warnings,
    })
}

/// Random baseline: uniformly chosen candidate nodes, each with one
/// uniformly chosen incident edge from the relevant queries.
fn random_selection(
    store: &WorkloadStore,
    relevant: &[QueryId],
    budget: usize,
    req: &SummaryRequest,
    builder: &mut Builder,
) -> Vec<NodeEntry> {
    let mut rng = Rng::new(req.random_seed);
    let pool = ranked_candidates(store, relevant, &req.seeds);
    let mut picks: Vec<usize> = rng.sample_indices(pool.len(), budget);
    // Rank order keeps the frequency ledger non-increasing.
    picks.sort_unstable();
    let selected: Vec<NodeEntry> = picks.into_iter().map(|i| pool[i].clone()).collect();

    for node in &selected {
        let mut incident: Vec<PathSignature> = Vec::new();
        for &id in relevant {
            let g = store.graph(id);
            for (s, p, o) in g.concrete_edges() {
                if s == o {
                    continue;
                }
                if s == &node.term || o == &node.term {
                    incident.push(PathSignature::from_walk(
                        &[s.clone(), o.clone()],
                        &[(p.clone(), Direction::Forward)],
                    ));
                }
            }
        }
        if incident.is_empty() {
            builder.warnings.push(Warning::IsolatedNode {
                term: node.term.clone(),
            });
            continue;
        }
        let edge = &incident[rng.below(incident.len())];
        builder.add_path(edge, store);
    }
    selected
}
