//! Coverage of held-out queries by a summary, and the train/test
//! evaluation protocol built on it.
//!
//! For every test query mentioning the seed(s), coverage is
//! `w_node * matched_nodes / nodes + w_edge * matched_edges / edges` over the
//! query's type-collapsed graph; the report averages it over those queries.

use std::collections::{BTreeSet, HashSet};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::QueryGraph;
use crate::rng::Rng;
use crate::summarizer::{summarize, Strategy, Summary, SummaryRequest};
use crate::term::{Term, Triple};
use crate::workload::{QueryId, WorkloadStore};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub w_node: f64,
    pub w_edge: f64,
    /// Fraction of each fold's queries used for training.
    pub split_ratio: f64,
    pub folds: usize,
    pub sample_seeds: usize,
    pub rng_seed: u64,
    /// Fraction of the training split actually handed to the summarizer;
    /// used to study how much log is needed. 1.0 uses all of it.
    pub train_fraction: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            w_node: 0.5,
            w_edge: 0.5,
            split_ratio: 0.8,
            folds: 10,
            sample_seeds: 10,
            rng_seed: 42,
            train_fraction: 1.0,
        }
    }
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.w_node)
            || !unit(self.w_edge)
            || (self.w_node + self.w_edge - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidRequest(
                "coverage weights must lie in [0,1] and sum to 1".into(),
            ));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidRequest(
                "split ratio must lie in (0,1)".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::InvalidRequest(
                "train fraction must lie in (0,1]".into(),
            ));
        }
        if self.folds == 0 {
            return Err(Error::InvalidRequest(
                "at least one fold is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryCoverage {
    pub query_id: QueryId,
    pub node_fraction: f64,
    pub edge_fraction: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub per_query: Vec<QueryCoverage>,
    pub mean: f64,
    pub mean_node: f64,
    pub mean_edge: f64,
    pub n: usize,
    /// Set when no test query mentions the seeds.
    pub no_matching_test_queries: bool,
}

/// Node and edge fractions of one query graph covered by a summary.
pub fn query_fractions(
    graph: &QueryGraph,
    summary_terms: &HashSet<&Term>,
    triples: &[Triple],
) -> (f64, f64) {
    let mut nodes = 0usize;
    let mut matched_nodes = 0usize;
    for t in graph.concrete_nodes() {
        nodes += 1;
        if summary_terms.contains(t) {
            matched_nodes += 1;
        }
    }
    let mut edges = 0usize;
    let mut matched_edges = 0usize;
    for (s, p, o) in graph.concrete_edges() {
        edges += 1;
        let hit = triples.iter().any(|t| {
            &t.predicate == p
                && (!s.is_concrete() || &t.subject == s)
                && (!o.is_concrete() || &t.object == o)
        });
        if hit {
            matched_edges += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(matched_nodes, nodes), ratio(matched_edges, edges))
}

/// Coverage of the test queries that mention every seed.
pub fn coverage(
    summary: &Summary,
    test: &WorkloadStore,
    seeds: &[Term],
    cfg: &CoverageConfig,
) -> CoverageReport {
    let terms = summary.all_terms();
    let ids = test.filter(seeds);
    let per_query: Vec<QueryCoverage> = ids
        .iter()
        .map(|&id| {
            let (node_fraction, edge_fraction) =
                query_fractions(test.graph(id), &terms, &summary.triples);
            QueryCoverage {
                query_id: id,
                node_fraction,
                edge_fraction,
                combined: cfg.w_node * node_fraction + cfg.w_edge * edge_fraction,
            }
        })
        .collect();
    let n = per_query.len();
    let mean_of = |f: fn(&QueryCoverage) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_query.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mean = mean_of(|q| q.combined);
    let mean_node = mean_of(|q| q.node_fraction);
    let mean_edge = mean_of(|q| q.edge_fraction);
    if n == 0 {
        log::warn!("NoMatchingTestQueries: no test query contains the seed(s)");
    }
    CoverageReport {
        per_query,
        mean,
        mean_node,
        mean_edge,
        n,
        no_matching_test_queries: n == 0,
    }
}

/// One evaluated cell: a (fold, seed, k, strategy) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub fold: usize,
    /// Position of the seed in the fold's sample.
    pub seed_index: usize,
    pub seed: Term,
    pub k: usize,
    pub strategy: Strategy,
    pub n: usize,
    pub node_cov: f64,
    pub edge_cov: f64,
    pub coverage: f64,
}

/// Aggregate over all folds for one (k, strategy).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub k: usize,
    pub strategy: Strategy,
    pub fold_means: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the fold means.
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationTable {
    pub rows: Vec<EvalRow>,
    pub stats: Vec<CellStats>,
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: [&str; 8] = [
    "fold", "seed", "k", "strategy", "n", "node_cov", "edge_cov", "coverage",
];

impl EvaluationTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.fold.to_string(),
                r.seed.to_string(),
                r.k.to_string(),
                r.strategy.to_string(),
                r.n.to_string(),
                format!("{:.6}", r.node_cov),
                format!("{:.6}", r.edge_cov),
                format!("{:.6}", r.coverage),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn stats_for(&self, k: usize, strategy: Strategy) -> Option<&CellStats> {
        self.stats
            .iter()
            .find(|s| s.k == k && s.strategy == strategy)
    }
}

const SEED_ATTEMPTS_PER_SEED: usize = 100;

/// Repeated random train/test evaluation.
///
/// Each fold shuffles the query ids with seed `rng_seed + fold`, trains on
/// the first `split_ratio` share and tests on the rest, samples seed terms
/// that occur in both parts, and scores every (seed, k, strategy) cell.
/// Rows come back sorted by (fold, seed sample order, k, strategy).
pub fn evaluate(
    store: &WorkloadStore,
    cfg: &CoverageConfig,
    k_values: &[usize],
    strategies: &[Strategy],
) -> Result<EvaluationTable> {
    cfg.validate()?;
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(Error::InvalidRequest(
            "k values must be positive and non-empty".into(),
        ));
    }
    if strategies.is_empty() {
        return Err(Error::InvalidRequest(
            "at least one strategy is required".into(),
        ));
    }
    let mut warnings = Vec::new();
    let mut rows = Vec::new();

    for fold in 0..cfg.folds {
        let mut rng = Rng::new(cfg.rng_seed.wrapping_add(fold as u64));
        let mut ids: Vec<QueryId> = (0..store.len()).collect();
        rng.shuffle(&mut ids);
        let n_train = (store.len() as f64 * cfg.split_ratio).floor() as usize;
        let (train_ids, test_ids) = ids.split_at(n_train);
        let used =
            ((train_ids.len() as f64 * cfg.train_fraction).ceil() as usize).min(train_ids.len());
        let mut train_ids = train_ids[..used].to_vec();
        let mut test_ids = test_ids.to_vec();
        if train_ids.is_empty() || test_ids.is_empty() {
            return Err(Error::InsufficientWorkload(format!(
                "fold {fold} has {} train and {} test queries",
                train_ids.len(),
                test_ids.len()
            )));
        }
        train_ids.sort_unstable();
        test_ids.sort_unstable();
        let train = store.subset(&train_ids);
        let test = store.subset(&test_ids);

        let seeds = sample_seeds(&train, &test, cfg.sample_seeds, &mut rng);
        if seeds.len() < cfg.sample_seeds {
            let msg = format!(
                "fold {fold}: sampled {} of {} seeds",
                seeds.len(),
                cfg.sample_seeds
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }

        let cells: Vec<(usize, &Term, u64, usize, Strategy)> = seeds
            .iter()
            .enumerate()
            .flat_map(|(i, (seed, random_seed))| {
                k_values.iter().flat_map(move |&k| {
                    strategies
                        .iter()
                        .map(move |&s| (i, seed, *random_seed, k, s))
                })
            })
            .collect();
        let fold_rows: Vec<Result<EvalRow>> = cells
            .par_iter()
            .map(|&(seed_index, seed, random_seed, k, strategy)| {
                let req = SummaryRequest {
                    seeds: vec![seed.clone()],
                    k,
                    strategy,
                    random_seed,
                };
                let summary = summarize(&train, &req)?;
                let report = coverage(&summary, &test, &req.seeds, cfg);
                Ok(EvalRow {
                    fold,
                    seed_index,
                    seed: seed.clone(),
                    k,
                    strategy,
                    n: report.n,
                    node_cov: report.mean_node,
                    edge_cov: report.mean_edge,
                    coverage: report.mean,
                })
            })
            .collect();
        for row in fold_rows {
            rows.push(row?);
        }
    }

    rows.sort_by(|a, b| {
        (a.fold, a.seed_index, a.k, a.strategy).cmp(&(b.fold, b.seed_index, b.k, b.strategy))
    });
    let stats = aggregate(&rows, cfg.folds, k_values, strategies);
    Ok(EvaluationTable {
        rows,
        stats,
        warnings,
    })
}

/// Samples distinct seed terms uniformly from the concrete nodes of the
/// training graphs, rejecting terms absent from every test graph. Each
/// seed is paired with a draw used to seed the random baseline.
fn sample_seeds(
    train: &WorkloadStore,
    test: &WorkloadStore,
    count: usize,
    rng: &mut Rng,
) -> Vec<(Term, u64)> {
    let nodes_of = |store: &WorkloadStore| -> BTreeSet<Term> {
        (0..store.len())
            .flat_map(|id| {
                store
                    .graph(id)
                    .concrete_nodes()
                    .cloned()
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let candidates: Vec<Term> = nodes_of(train).into_iter().collect();
    let test_nodes = nodes_of(test);
    let mut chosen: Vec<(Term, u64)> = Vec::with_capacity(count);
    if candidates.is_empty() {
        return chosen;
    }
    let mut attempts = 0;
    while chosen.len() < count && attempts < count * SEED_ATTEMPTS_PER_SEED {
        attempts += 1;
        let term = &candidates[rng.below(candidates.len())];
        if !test_nodes.contains(term) || chosen.iter().any(|(t, _)| t == term) {
            continue;
        }
        chosen.push((term.clone(), rng.next_u64()));
    }
    chosen
}

fn aggregate(
    rows: &[EvalRow],
    folds: usize,
    k_values: &[usize],
    strategies: &[Strategy],
) -> Vec<CellStats> {
    let mut stats = Vec::new();
    for &k in k_values {
        for &strategy in strategies {
            let fold_means: Vec<f64> = (0..folds)
                .filter_map(|f| {
                    let vals: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.fold == f && r.k == k && r.strategy == strategy)
                        .map(|r| r.coverage)
                        .collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect();
            let m = fold_means.len() as f64;
            let mean = if fold_means.is_empty() {
                0.0
            } else {
                fold_means.iter().sum::<f64>() / m
            };
            let std_dev = if fold_means.len() < 2 {
                0.0
            } else {
                (fold_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            };
            stats.push(CellStats {
                k,
                strategy,
                fold_means,
                mean,
                std_dev,
            });
        }
    }
    stats
}
