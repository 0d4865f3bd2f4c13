//! Synthetic query logs with Zipf-skewed schema popularity.
//!
//! A random schema assigns every predicate a domain and a range class and
//! every instance a class, all drawn with Zipf popularity. Each query is a
//! random walk over that schema: it starts from a typed variable or an
//! instance and keeps attaching predicate edges (to new typed variables
//! or to instances) until it reaches its pattern count, which follows a
//! truncated geometric law with the requested mean.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const CLASS_NS: &str = "http://example.org/class/";
pub const PROP_NS: &str = "http://example.org/prop/";
pub const RES_NS: &str = "http://example.org/resource/";

/// Longest query the generator emits, in patterns.
pub const MAX_PATTERNS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_queries: usize,
    pub classes: usize,
    pub predicates: usize,
    pub instances: usize,
    pub mean_patterns: f64,
    /// Zipf exponent; 0 is uniform.
    pub skew: f64,
    pub rng_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_queries: 50_000,
            classes: 400,
            predicates: 1300,
            instances: 100_000,
            mean_patterns: 2.0,
            skew: 1.0,
            rng_seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_queries == 0 || self.classes == 0 || self.predicates == 0 || self.instances == 0 {
            return Err(Error::InvalidRequest(
                "synthetic counts must be at least 1".into(),
            ));
        }
        if !(self.skew >= 0.0 && self.skew.is_finite()) {
            return Err(Error::InvalidRequest("skew exponent must be >= 0".into()));
        }
        let max_mean = (MAX_PATTERNS as f64 + 1.0) / 2.0;
        if !(self.mean_patterns >= 1.0 && self.mean_patterns < max_mean) {
            return Err(Error::InvalidRequest(format!(
                "mean pattern count must lie in [1, {max_mean})"
            )));
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over ranks `0..n` with weight `1 / (rank + 1)^skew`.
/// Any prefix `0..m` of the ranks can be sampled from the same table.
#[derive(Debug, Clone)]
pub struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    pub fn new(n: usize, skew: f64) -> Self {
        Self::from_weights((1..=n).map(|r| (r as f64).powf(-skew)))
    }

    fn from_weights(weights: impl Iterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Zipf { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        self.sample_prefix(self.len(), rng)
    }

    /// A rank in `0..m`, weighted as in the full table.
    pub fn sample_prefix(&self, m: usize, rng: &mut Rng) -> usize {
        let prefix = &self.cumulative[..m];
        let u = rng.unit_f64() * prefix[m - 1];
        prefix.partition_point(|&c| c <= u).min(m - 1)
    }
}

/// Geometric law on `1..=max` conditioned on `<= max`, with the success
/// probability solved so the mean matches.
#[derive(Debug, Clone)]
pub struct TruncatedGeometric {
    sampler: Zipf,
}

impl TruncatedGeometric {
    pub fn with_mean(mean: f64, max: usize) -> Self {
        let pmf = |q: f64| -> Vec<f64> { (0..max).map(|i| (1.0 - q).powi(i as i32) * q).collect() };
        let mean_of = |q: f64| -> f64 {
            let p = pmf(q);
            let total: f64 = p.iter().sum();
            p.iter()
                .enumerate()
                .map(|(i, w)| (i + 1) as f64 * w)
                .sum::<f64>()
                / total
        };
        // mean_of falls from (max+1)/2 as q -> 0 to 1 at q = 1.
        let (mut lo, mut hi) = (1e-9, 1.0);
        if mean <= 1.0 {
            lo = 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_of(mid) > mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = if mean <= 1.0 { 1.0 } else { 0.5 * (lo + hi) };
        TruncatedGeometric {
            sampler: Zipf::from_weights(pmf(q).into_iter()),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        self.sampler.sample(rng) + 1
    }
}

struct Schema {
    class_pick: Zipf,
    pred_pick: Zipf,
    range: Vec<usize>,
    /// Predicates (rank order) whose domain is each class.
    by_domain: Vec<Vec<usize>>,
    /// Instances (rank order) of each class.
    members: Vec<Vec<usize>>,
    /// Rank sampler long enough for any of those lists.
    list_pick: Zipf,
}

impl Schema {
    fn new(spec: &SyntheticSpec, rng: &mut Rng) -> Self {
        let class_pick = Zipf::new(spec.classes, spec.skew);
        let pred_pick = Zipf::new(spec.predicates, spec.skew);
        let mut range = Vec::with_capacity(spec.predicates);
        let mut by_domain = vec![Vec::new(); spec.classes];
        for p in 0..spec.predicates {
            let d = class_pick.sample(rng);
            range.push(class_pick.sample(rng));
            by_domain[d].push(p);
        }
        let mut members = vec![Vec::new(); spec.classes];
        for i in 0..spec.instances {
            members[class_pick.sample(rng)].push(i);
        }
        let longest = by_domain
            .iter()
            .chain(&members)
            .map(Vec::len)
            .max()
            .unwrap_or(0);
        let list_pick = Zipf::new(longest, spec.skew);
        Schema {
            class_pick,
            pred_pick,
            range,
            by_domain,
            members,
            list_pick,
        }
    }

    fn pick_from<'a>(&self, list: &'a [usize], rng: &mut Rng) -> Option<&'a usize> {
        if list.is_empty() {
            return None;
        }
        list.get(self.list_pick.sample_prefix(list.len(), rng))
    }
}

#[derive(Clone)]
enum Node {
    Var(usize),
    Instance(usize),
}

fn render(node: &Node) -> String {
    match node {
        Node::Var(i) => format!("?v{i}"),
        Node::Instance(i) => format!("r:R{i}"),
    }
}

fn generate_query(schema: &Schema, lengths: &TruncatedGeometric, rng: &mut Rng, out: &mut String) {
    let target = lengths.sample(rng);
    let mut patterns: Vec<String> = Vec::with_capacity(target);
    let mut nodes: Vec<(Node, usize)> = Vec::new();
    let mut vars = 0usize;

    let start_class = schema.class_pick.sample(rng);
    let start_instance = if rng.chance(0.4) {
        schema.pick_from(&schema.members[start_class], rng).copied()
    } else {
        None
    };
    match start_instance {
        Some(i) => nodes.push((Node::Instance(i), start_class)),
        None => {
            patterns.push(format!("?v0 a c:C{start_class} ."));
            nodes.push((Node::Var(0), start_class));
            vars = 1;
        }
    }

    while patterns.len() < target {
        let (anchor, class) = nodes[rng.below(nodes.len())].clone();
        let predicate = match schema.pick_from(&schema.by_domain[class], rng) {
            Some(&p) => p,
            None => schema.pred_pick.sample(rng),
        };
        let range = schema.range[predicate];
        let instance = if rng.chance(0.3) {
            schema.pick_from(&schema.members[range], rng).copied()
        } else {
            None
        };
        let object = match instance {
            Some(i) => Node::Instance(i),
            None => {
                vars += 1;
                Node::Var(vars - 1)
            }
        };
        patterns.push(format!(
            "{} p:P{predicate} {} .",
            render(&anchor),
            render(&object)
        ));
        if let Node::Var(v) = object {
            if patterns.len() < target && rng.chance(0.7) {
                patterns.push(format!("?v{v} a c:C{range} ."));
            }
        }
        nodes.push((object, range));
    }

    let _ = write!(
        out,
        "PREFIX c: <{CLASS_NS}> PREFIX p: <{PROP_NS}> PREFIX r: <{RES_NS}> SELECT * WHERE {{ {} }}",
        patterns.join(" ")
    );
}

/// Writes `spec.n_queries` raw-lines queries.
pub fn generate_synthetic<W: Write>(spec: &SyntheticSpec, mut out: W) -> Result<()> {
    spec.validate()?;
    let mut rng = Rng::new(spec.rng_seed);
    let schema = Schema::new(spec, &mut rng);
    let lengths = TruncatedGeometric::with_mean(spec.mean_patterns, MAX_PATTERNS);
    let mut line = String::new();
    for _ in 0..spec.n_queries {
        line.clear();
        generate_query(&schema, &lengths, &mut rng, &mut line);
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Convenience wrapper returning the whole log as a string.
pub fn generate_synthetic_string(spec: &SyntheticSpec) -> Result<String> {
    let mut buf = Vec::new();
    generate_synthetic(spec, &mut buf)?;
    Ok(String::from_utf8(buf).expect("generator emits ASCII"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::parse_query;

    fn small(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n_queries: 500,
            classes: 20,
            predicates: 40,
            instances: 200,
            rng_seed: seed,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn every_query_parses() {
        let log = generate_synthetic_string(&small(3)).unwrap();
        assert_eq!(log.lines().count(), 500);
        for line in log.lines() {
            parse_query(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_synthetic_string(&small(9)).unwrap(),
            generate_synthetic_string(&small(9)).unwrap()
        );
        assert_ne!(
            generate_synthetic_string(&small(9)).unwrap(),
            generate_synthetic_string(&small(10)).unwrap()
        );
    }

    #[test]
    fn rejects_invalid_specs() {
        let zero = SyntheticSpec {
            n_queries: 0,
            ..small(1)
        };
        assert!(zero.validate().is_err());
        let neg = SyntheticSpec {
            skew: -1.0,
            ..small(1)
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn geometric_mean_matches() {
        for mean in [1.0, 1.5, 3.9] {
            let g = TruncatedGeometric::with_mean(mean, MAX_PATTERNS);
            let mut rng = Rng::new(1);
            let avg = (0..20_000).map(|_| g.sample(&mut rng) as f64).sum::<f64>() / 20_000.0;
            assert!((avg - mean).abs() < 0.05, "mean {mean}: {avg}");
        }
    }

    #[test]
    fn zipf_prefers_low_ranks() {
        let z = Zipf::new(10, 1.0);
        let mut rng = Rng::new(2);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            counts[z.sample(&mut rng)] += 1;
        }
        assert!(counts[0] > counts[1] && counts[1] > counts[9]);
    }

    #[test]
    fn unit_mean_gives_single_pattern_queries() {
        let spec = SyntheticSpec {
            n_queries: 10_000,
            mean_patterns: 1.0,
            ..small(4)
        };
        let log = generate_synthetic_string(&spec).unwrap();
        let total: usize = log
            .lines()
            .map(|l| parse_query(l).unwrap().patterns.len())
            .sum();
        let avg = total as f64 / 10_000.0;
        assert!((avg - 1.0).abs() <= 0.2, "{avg}");
    }

    #[test]
    fn zero_skew_spreads_classes_evenly() {
        let spec = SyntheticSpec {
            n_queries: 10_000,
            mean_patterns: 1.0,
            skew: 0.0,
            ..small(6)
        };
        let log = generate_synthetic_string(&spec).unwrap();
        let mut counts = vec![0usize; spec.classes];
        for line in log.lines() {
            if let Some(rest) = line.split(" a c:C").nth(1) {
                let class: usize = rest.split(' ').next().unwrap().parse().unwrap();
                counts[class] += 1;
            }
        }
        let n: usize = counts.iter().sum();
        let expected = n as f64 / spec.classes as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 19 degrees of freedom; 43.82 is the 0.999 quantile.
        assert!(chi2 < 43.82, "chi2 {chi2} over {n} typed queries");
    }

    #[test]
    fn prefix_sampling_stays_in_prefix() {
        let z = Zipf::new(50, 1.0);
        let mut rng = Rng::new(8);
        for m in 1..=50 {
            assert!(z.sample_prefix(m, &mut rng) < m);
        }
    }
}
