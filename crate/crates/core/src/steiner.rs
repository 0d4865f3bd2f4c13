//! Toy-scale Steiner model of the summary problem.
//!
//! A summary of `k` nodes around `λ` seeds is a maximum-weight connected
//! `k`-node tree. Rescaling weights into costs (`1 - normalized weight`,
//! seeds at zero) turns it into a node-weighted Steiner problem, which the
//! cheapest-insertion heuristic ([`chins`]) approximates. [`exact_solve`]
//! enumerates subsets and is only meant for graphs of at most 16 nodes.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const EXACT_NODE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl WeightedGraph {
    pub fn new(weights: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::MalformedInstance("graph has no nodes".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::MalformedInstance(
                "weights must be finite and non-negative".into(),
            ));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::MalformedInstance(format!(
                    "edge {u}-{v} out of range"
                )));
            }
            if u == v {
                return Err(Error::MalformedInstance(format!("self-loop on {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(WeightedGraph {
            weights,
            edges,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    /// Connected-component label per node, labels in order of first node.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    fn with_weights(&self, weights: Vec<f64>) -> Self {
        WeightedGraph {
            weights,
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinerInstance {
    pub graph: WeightedGraph,
    /// Sorted, distinct seed nodes.
    pub terminals: Vec<usize>,
    pub k: usize,
}

impl SteinerInstance {
    pub fn new(graph: WeightedGraph, terminals: Vec<usize>, k: usize) -> Result<Self> {
        let mut terminals = terminals;
        terminals.sort_unstable();
        terminals.dedup();
        if terminals.is_empty() {
            return Err(Error::MalformedInstance("no terminals".into()));
        }
        if terminals.iter().any(|&t| t >= graph.node_count()) {
            return Err(Error::MalformedInstance("terminal out of range".into()));
        }
        if k < terminals.len() || k > graph.node_count() {
            return Err(Error::MalformedInstance(format!(
                "k={k} must lie between {} and {}",
                terminals.len(),
                graph.node_count()
            )));
        }
        Ok(SteinerInstance {
            graph,
            terminals,
            k,
        })
    }

    /// Parses `n m t k`, then n weights, m edges `u v`, and t terminal ids.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<&str> {
            tokens
                .next()
                .ok_or_else(|| Error::MalformedInstance(format!("missing {what}")))
        };
        let int = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::MalformedInstance(format!("bad integer {s:?}")))
        };
        let n = int(next("n")?)?;
        let m = int(next("m")?)?;
        let t = int(next("t")?)?;
        let k = int(next("k")?)?;
        let mut weights = Vec::with_capacity(n);
        for _ in 0..n {
            let s = next("weight")?;
            weights.push(
                s.parse::<f64>()
                    .map_err(|_| Error::MalformedInstance(format!("bad weight {s:?}")))?,
            );
        }
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = int(next("edge")?)?;
            let v = int(next("edge")?)?;
            edges.push((u, v));
        }
        let mut terminals = Vec::with_capacity(t);
        for _ in 0..t {
            terminals.push(int(next("terminal")?)?);
        }
        if next("end").is_ok() {
            return Err(Error::MalformedInstance("trailing tokens".into()));
        }
        SteinerInstance::new(WeightedGraph::new(weights, edges)?, terminals, k)
    }

    pub fn to_text(&self) -> String {
        let g = &self.graph;
        let mut out = format!(
            "{} {} {} {}\n",
            g.node_count(),
            g.edges.len(),
            self.terminals.len(),
            self.k
        );
        let weights: Vec<String> = g.weights.iter().map(|w| w.to_string()).collect();
        out.push_str(&weights.join(" "));
        out.push('\n');
        for (u, v) in &g.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        let terms: Vec<String> = self.terminals.iter().map(|t| t.to_string()).collect();
        out.push_str(&terms.join(" "));
        out.push('\n');
        out
    }

    /// Random connected instance: a random spanning tree plus each other
    /// node pair joined with probability `extra_edge_p`; weights uniform in
    /// `[0, 1)`; `terminals` distinct random seeds.
    pub fn random(
        rng: &mut Rng,
        n: usize,
        k: usize,
        terminals: usize,
        extra_edge_p: f64,
    ) -> Result<Self> {
        let weights: Vec<f64> = (0..n).map(|_| rng.unit_f64()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let mut edges = Vec::new();
        let mut has = vec![vec![false; n]; n];
        for i in 1..n {
            let (u, v) = (order[i], order[rng.below(i)]);
            has[u][v] = true;
            has[v][u] = true;
            edges.push((u.min(v), u.max(v)));
        }
        for (u, row) in has.iter().enumerate() {
            for (v, &linked) in row.iter().enumerate().skip(u + 1) {
                if !linked && rng.chance(extra_edge_p) {
                    edges.push((u, v));
                }
            }
        }
        let terminals = rng.sample_indices(n, terminals);
        SteinerInstance::new(WeightedGraph::new(weights, edges)?, terminals, k)
    }
}

impl SteinerInstance {
    /// Random instances with `2..=max_nodes` nodes, `k <= max_k` and
    /// `1..=k` terminals, redrawn until some connected `k`-set holds every
    /// terminal.
    pub fn random_feasible(
        rng: &mut Rng,
        max_nodes: usize,
        max_k: usize,
        extra_edge_p: f64,
    ) -> Result<Self> {
        if !(2..=EXACT_NODE_LIMIT).contains(&max_nodes) || max_k == 0 {
            return Err(Error::InvalidRequest(format!(
                "need 2 <= max_nodes <= {EXACT_NODE_LIMIT} and max_k >= 1"
            )));
        }
        loop {
            let n = 2 + rng.below(max_nodes - 1);
            let k = 1 + rng.below(n.min(max_k));
            let terminals = 1 + rng.below(k);
            let inst = SteinerInstance::random(rng, n, k, terminals, extra_edge_p)?;
            if exact_solve(&inst).is_ok() {
                return Ok(inst);
            }
        }
    }
}

/// A tree as a sorted node list and an edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Tree {
    pub fn total(&self, values: &[f64]) -> f64 {
        self.nodes.iter().map(|&v| values[v]).sum()
    }

    /// Connected with exactly `|nodes| - 1` edges, all between tree nodes.
    pub fn is_tree(&self) -> bool {
        if self.nodes.is_empty() || self.edges.len() + 1 != self.nodes.len() {
            return false;
        }
        let pos = |v: usize| self.nodes.binary_search(&v).ok();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for &(u, v) in &self.edges {
            let (Some(a), Some(b)) = (pos(u), pos(v)) else {
                return false;
            };
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }
}

/// Rescales weights to costs `1 - (w - min) / (max - min)` (all zero when
/// weights are uniform) and zeroes the terminals.
pub fn normalize_to_min_cost(graph: &WeightedGraph, terminals: &[usize]) -> WeightedGraph {
    let w = graph.weights();
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut costs: Vec<f64> = if max > min {
        w.iter().map(|x| 1.0 - (x - min) / (max - min)).collect()
    } else {
        vec![0.0; w.len()]
    };
    for &t in terminals {
        costs[t] = 0.0;
    }
    graph.with_weights(costs)
}

fn mask_connected(graph: &WeightedGraph, mask: u32) -> bool {
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in graph.neighbors(u) {
            let bit = 1u32 << v;
            if mask & bit != 0 && seen & bit == 0 {
                seen |= bit;
                stack.push(v);
            }
        }
    }
    seen == mask
}

fn spanning_tree(graph: &WeightedGraph, nodes: Vec<usize>) -> Tree {
    let inside = |v: usize| nodes.binary_search(&v).is_ok();
    let mut edges = Vec::with_capacity(nodes.len().saturating_sub(1));
    let mut seen = vec![false; graph.node_count()];
    seen[nodes[0]] = true;
    let mut queue = VecDeque::from([nodes[0]]);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if inside(v) && !seen[v] {
                seen[v] = true;
                edges.push((u.min(v), u.max(v)));
                queue.push_back(v);
            }
        }
    }
    Tree { nodes, edges }
}

fn mask_nodes(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Maximum-weight connected `k`-node subset containing every terminal,
/// found by enumeration. Weight ties go to the lexicographically least
/// node set (every candidate spans with `k - 1` edges, so size never
/// breaks a tie).
pub fn exact_solve(inst: &SteinerInstance) -> Result<Tree> {
    let g = &inst.graph;
    let n = g.node_count();
    if n > EXACT_NODE_LIMIT {
        return Err(Error::SizeLimit {
            nodes: n,
            limit: EXACT_NODE_LIMIT,
        });
    }
    let required: u32 = inst.terminals.iter().map(|&t| 1u32 << t).sum();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != inst.k || mask & required != required {
            continue;
        }
        if !mask_connected(g, mask) {
            continue;
        }
        let nodes = mask_nodes(mask);
        let weight: f64 = nodes.iter().map(|&v| g.weights()[v]).sum();
        let better = match &best {
            None => true,
            Some((bw, bn)) => weight > *bw || (weight == *bw && nodes < *bn),
        };
        if better {
            best = Some((weight, nodes));
        }
    }
    best.map(|(_, nodes)| spanning_tree(g, nodes))
        .ok_or(Error::Infeasible)
}

/// Cheapest-insertion heuristic.
///
/// Targets are the terminals plus the `k - λ` cheapest other nodes (ties by
/// id). Starting from the first terminal, the target nearest to the current
/// tree is attached along its cheapest path, where a path costs the sum of
/// the costs of the nodes it adds, until every target is in.
pub fn chins(inst: &SteinerInstance, costs: &[f64]) -> Result<Tree> {
    let g = &inst.graph;
    let n = g.node_count();
    let mut others: Vec<usize> = (0..n)
        .filter(|v| inst.terminals.binary_search(v).is_err())
        .collect();
    others.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let mut targets: Vec<usize> = inst.terminals.clone();
    targets.extend(others.into_iter().take(inst.k - inst.terminals.len()));

    let mut in_tree = vec![false; n];
    in_tree[inst.terminals[0]] = true;
    let mut edges = Vec::new();
    loop {
        let remaining: Vec<usize> = targets.iter().copied().filter(|&t| !in_tree[t]).collect();
        if remaining.is_empty() {
            break;
        }
        let (dist, pred) = node_weighted_dijkstra(g, costs, &in_tree);
        let target = remaining
            .into_iter()
            .filter(|&t| dist[t].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .ok_or(Error::Disconnected)?;
        let mut v = target;
        while !in_tree[v] {
            let u = pred[v].expect("reached nodes have predecessors");
            in_tree[v] = true;
            edges.push((u.min(v), u.max(v)));
            v = u;
        }
    }
    let nodes = (0..n).filter(|&v| in_tree[v]).collect();
    Ok(Tree { nodes, edges })
}

/// Multi-source shortest paths from the current tree, paying the cost of
/// each node entered. Settles nodes in (distance, id) order.
fn node_weighted_dijkstra(
    g: &WeightedGraph,
    costs: &[f64],
    sources: &[bool],
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    for v in 0..n {
        if sources[v] {
            dist[v] = 0.0;
        }
    }
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
        else {
            break;
        };
        done[u] = true;
        for &v in g.neighbors(u) {
            if sources[v] {
                continue;
            }
            let candidate = dist[u] + costs[v];
            if candidate < dist[v] {
                dist[v] = candidate;
                pred[v] = Some(u);
            }
        }
    }
    (dist, pred)
}

/// Outcome of comparing the heuristic with the exact optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub exact_cost: f64,
    pub chins_cost: f64,
    pub exact_weight: f64,
    pub chins_nodes: usize,
}

impl BoundCheck {
    /// `None` when the optimum costs nothing.
    pub fn ratio(&self) -> Option<f64> {
        (self.exact_cost > 0.0).then(|| self.chins_cost / self.exact_cost)
    }

    /// The heuristic costs at most twice the optimum (and nothing when the
    /// optimum costs nothing).
    pub fn within_bound(&self) -> bool {
        match self.ratio() {
            Some(r) => r <= 2.0 + 1e-12,
            None => self.chins_cost == 0.0,
        }
    }
}

pub fn check_bound(inst: &SteinerInstance) -> Result<BoundCheck> {
    let costs = normalize_to_min_cost(&inst.graph, &inst.terminals);
    let exact = exact_solve(inst)?;
    let heuristic = chins(inst, costs.weights())?;
    Ok(BoundCheck {
        exact_cost: exact.total(costs.weights()),
        chins_cost: heuristic.total(costs.weights()),
        exact_weight: exact.total(inst.graph.weights()),
        chins_nodes: heuristic.nodes.len(),
    })
}
