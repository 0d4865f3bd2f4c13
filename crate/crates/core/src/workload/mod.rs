//! Query-log ingestion: reading logs from disk, parsing each query, and
//! indexing the workload by the concrete terms its queries mention.

mod parser;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_graph, QueryGraph};
use crate::term::{Term, TriplePattern};

pub use parser::{parse_query, parse_query_with, parse_term, ParseError, ParseOptions};

/// Ordinal index of a query within its workload.
pub type QueryId = usize;

/// One workload query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub id: QueryId,
    pub patterns: Vec<TriplePattern>,
    pub raw: String,
    /// 1-based line (or file ordinal for directories) the query came from.
    pub source_line: usize,
}

impl ParsedQuery {
    /// Concrete terms appearing anywhere in the pattern list.
    pub fn concrete_terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.patterns
            .iter()
            .flat_map(|p| p.terms())
            .filter(|t| t.is_concrete())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    RawLines,
    UrlencodedLines,
    RqDirectory,
    Tsv { column: usize },
}

impl FromStr for LogFormat {
    type Err = Error;

    /// Parses everything but `tsv`, whose column is supplied separately.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw-lines" => Ok(LogFormat::RawLines),
            "urlencoded-lines" => Ok(LogFormat::UrlencodedLines),
            "rq-directory" => Ok(LogFormat::RqDirectory),
            "tsv" => Err(Error::InvalidRequest(
                "format tsv requires a column index".into(),
            )),
            other => Err(Error::InvalidRequest(format!(
                "unknown log format {other:?}"
            ))),
        }
    }
}

/// Side of a triple a term occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Subject,
    Object,
}

/// (predicate, side) -> term -> number of queries with that term there.
type PositionIndex = HashMap<(Term, Side), BTreeMap<Term, usize>>;

/// An immutable, indexed query workload.
#[derive(Debug)]
pub struct WorkloadStore {
    queries: Vec<ParsedQuery>,
    graphs: Vec<QueryGraph>,
    rejected: usize,
    /// Concrete term -> ascending ids of the queries mentioning it.
    term_index: HashMap<Term, Vec<QueryId>>,
    positions: OnceLock<PositionIndex>,
}

impl WorkloadStore {
    /// Builds a store, renumbering queries `0..n` in the given order.
    pub fn from_queries(queries: Vec<ParsedQuery>, rejected: usize) -> Self {
        let mut queries = queries;
        for (i, q) in queries.iter_mut().enumerate() {
            q.id = i;
        }
        let graphs: Vec<QueryGraph> = queries.par_iter().map(build_graph).collect();
        let mut term_index: HashMap<Term, Vec<QueryId>> = HashMap::new();
        for q in &queries {
            for term in q.concrete_terms() {
                let ids = term_index.entry(term.clone()).or_default();
                if ids.last() != Some(&q.id) {
                    ids.push(q.id);
                }
            }
        }
        WorkloadStore {
            queries,
            graphs,
            rejected,
            term_index,
            positions: OnceLock::new(),
        }
    }

    /// A new store holding copies of the given queries, in the given order.
    pub fn subset(&self, ids: &[QueryId]) -> Self {
        let queries = ids.iter().map(|&id| self.queries[id].clone()).collect();
        WorkloadStore::from_queries(queries, 0)
    }

    pub fn queries(&self) -> &[ParsedQuery] {
        &self.queries
    }

    pub fn query(&self, id: QueryId) -> &ParsedQuery {
        &self.queries[id]
    }

    /// Type-collapsed graph of a query.
    pub fn graph(&self, id: QueryId) -> &QueryGraph {
        &self.graphs[id]
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected
    }

    /// Ids of the queries mentioning `term`, ascending.
    pub fn postings(&self, term: &Term) -> &[QueryId] {
        self.term_index.get(term).map_or(&[], Vec::as_slice)
    }

    /// Indexed concrete terms with their posting lists, in arbitrary order.
    pub fn indexed_terms(&self) -> impl Iterator<Item = (&Term, &[QueryId])> + '_ {
        self.term_index.iter().map(|(t, ids)| (t, ids.as_slice()))
    }

    /// Ids of the queries whose patterns contain every term, ascending.
    /// The empty conjunction selects every query.
    pub fn filter(&self, terms: &[Term]) -> Vec<QueryId> {
        if terms.is_empty() {
            return (0..self.len()).collect();
        }
        let mut lists: Vec<&[QueryId]> = terms.iter().map(|t| self.postings(t)).collect();
        lists.sort_by_key(|l| l.len());
        let mut result = lists[0].to_vec();
        for list in &lists[1..] {
            result = intersect_sorted(&result, list);
        }
        result
    }

    /// Like [`filter`](Self::filter), restricted to an ascending id set.
    pub fn filter_within(&self, within: &[QueryId], terms: &[Term]) -> Vec<QueryId> {
        let mut result = within.to_vec();
        let mut lists: Vec<&[QueryId]> = terms.iter().map(|t| self.postings(t)).collect();
        lists.sort_by_key(|l| l.len());
        for list in lists {
            result = intersect_sorted(&result, list);
        }
        result
    }

    /// For a predicate and side, the concrete terms seen there and the
    /// number of queries (type-collapsed) in which each occurs.
    pub fn position_counts(&self, predicate: &Term, side: Side) -> Option<&BTreeMap<Term, usize>> {
        self.positions
            .get_or_init(|| self.build_position_index())
            .get(&(predicate.clone(), side))
    }

    fn build_position_index(&self) -> PositionIndex {
        let mut index: PositionIndex = HashMap::new();
        for g in &self.graphs {
            let mut seen = std::collections::HashSet::new();
            for (s, p, o) in g.concrete_edges() {
                for (term, side) in [(s, Side::Subject), (o, Side::Object)] {
                    if term.is_concrete() && seen.insert((p, side, term)) {
                        *index
                            .entry((p.clone(), side))
                            .or_default()
                            .entry(term.clone())
                            .or_default() += 1;
                    }
                }
            }
        }
        index
    }
}

pub(crate) fn intersect_sorted(a: &[QueryId], b: &[QueryId]) -> Vec<QueryId> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// One raw record read from a log, before parsing.
struct Record {
    text: String,
    line: usize,
}

const BATCH: usize = 4096;

/// Reads and parses a query log.
///
/// Records that fail to parse are counted and logged at debug level.
/// Input is consumed in batches, parsed in parallel, and numbered in input
/// order, so the result does not depend on thread scheduling.
pub fn load_workload(
    path: &Path,
    format: LogFormat,
    options: &ParseOptions,
) -> Result<WorkloadStore> {
    let mut queries = Vec::new();
    let mut rejected = 0usize;
    let mut missing_column = 0usize;
    let mut sink = |batch: &mut Vec<Record>, skip_header: bool| {
        let parsed: Vec<_> = batch
            .par_iter()
            .map(|r| parse_query_with(&r.text, options))
            .collect();
        for (i, (record, result)) in batch.drain(..).zip(parsed).enumerate() {
            match result {
                Ok(mut q) => {
                    q.source_line = record.line;
                    queries.push(q);
                }
                Err(_) if skip_header && i == 0 && record.line == 1 => {
                    log::debug!("skipping header row");
                }
                Err(e) => {
                    log::debug!("line {}: {e}", record.line);
                    rejected += 1;
                }
            }
        }
    };

    match format {
        LogFormat::RqDirectory => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "rq") && p.is_file())
                .collect();
            files.sort();
            let mut batch = Vec::new();
            for (i, file) in files.iter().enumerate() {
                batch.push(Record {
                    text: std::fs::read_to_string(file)?,
                    line: i + 1,
                });
                if batch.len() == BATCH {
                    sink(&mut batch, false);
                }
            }
            sink(&mut batch, false);
        }
        _ => {
            let reader = BufReader::new(File::open(path)?);
            let mut batch = Vec::with_capacity(BATCH);
            let mut first_batch = true;
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                let line_no = i + 1;
                let text = match format {
                    LogFormat::RawLines => line,
                    LogFormat::UrlencodedLines => decode_form(&line),
                    LogFormat::Tsv { column } => match line.split('\t').nth(column) {
                        Some(field) => field.to_string(),
                        None => {
                            log::debug!("line {line_no}: missing column {column}");
                            missing_column += 1;
                            continue;
                        }
                    },
                    LogFormat::RqDirectory => unreachable!(),
                };
                if text.trim().is_empty() {
                    continue;
                }
                batch.push(Record {
                    text,
                    line: line_no,
                });
                if batch.len() == BATCH {
                    sink(
                        &mut batch,
                        first_batch && matches!(format, LogFormat::Tsv { .. }),
                    );
                    first_batch = false;
                }
            }
            sink(
                &mut batch,
                first_batch && matches!(format, LogFormat::Tsv { .. }),
            );
        }
    }
    rejected += missing_column;

    log::info!(
        "loaded {} queries from {} ({} rejected)",
        queries.len(),
        path.display(),
        rejected
    );
    if queries.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    Ok(WorkloadStore::from_queries(queries, rejected))
}

/// Percent-decodes a form-encoded line (`+` is a space).
fn decode_form(line: &str) -> String {
    let spaced = line.replace('+', " ");
    percent_encoding::percent_decode_str(&spaced)
        .decode_utf8_lossy()
        .into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    pub(crate) const EXAMPLE: &str = include_str!("../../fixtures/person_workload.txt");

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn load(content: &str, format: LogFormat) -> Result<WorkloadStore> {
        let f = write_tmp(content);
        load_workload(f.path(), format, &ParseOptions::default())
    }

    #[test]
    fn loads_example_log() {
        let store = load(EXAMPLE, LogFormat::RawLines).unwrap();
        assert_eq!(store.len(), 5);
        assert_eq!(store.rejected_count(), 0);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            load("", LogFormat::RawLines),
            Err(Error::EmptyWorkload)
        ));
    }

    #[test]
    fn garbage_lines_are_counted() {
        let content = "SELECT * WHERE { ?x a A }\nnot sparql\nSELECT * WHERE { ?x a B }\nnot sparql\nSELECT * WHERE { ?x a C }\n";
        let store = load(content, LogFormat::RawLines).unwrap();
        assert_eq!(store.len(), 3);
        assert_eq!(store.rejected_count(), 2);
        assert_eq!(store.query(2).source_line, 5);
    }

    #[test]
    fn urlencoded_lines() {
        let content = "SELECT+%3Fx+WHERE+%7B+%3Fx+a+%3Chttp%3A%2F%2Fex.org%2FC%3E+%7D\n";
        let store = load(content, LogFormat::UrlencodedLines).unwrap();
        assert_eq!(
            store.query(0).patterns[0].object,
            Term::iri("http://ex.org/C")
        );
    }

    #[test]
    fn tsv_skips_unparsable_header() {
        let content = "ts\tquery\n1\tSELECT * WHERE { ?x a A }\n2\tnope\n3\n";
        let store = load(content, LogFormat::Tsv { column: 1 }).unwrap();
        assert_eq!(store.len(), 1);
        // "nope" and the row missing its column
        assert_eq!(store.rejected_count(), 2);
    }

    #[test]
    fn rq_directory_in_filename_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.rq"), "SELECT * WHERE { ?x a B }").unwrap();
        std::fs::write(dir.path().join("a.rq"), "SELECT * WHERE {\n ?x a A\n}").unwrap();
        std::fs::write(dir.path().join("c.txt"), "SELECT * WHERE { ?x a C }").unwrap();
        let store =
            load_workload(dir.path(), LogFormat::RqDirectory, &ParseOptions::default()).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.query(0).patterns[0].object, Term::iri("A"));
    }

    #[test]
    fn missing_path_is_io_error() {
        let r = load_workload(
            Path::new("/nonexistent/log"),
            LogFormat::RawLines,
            &ParseOptions::default(),
        );
        assert!(matches!(r, Err(Error::Io(_))));
    }

    #[test]
    fn filter_example() {
        let store = load(EXAMPLE, LogFormat::RawLines).unwrap();
        assert_eq!(store.filter(&[Term::iri("Person")]), vec![0, 1, 2]);
        assert_eq!(store.filter(&[Term::iri("Publication")]), vec![4]);
        assert_eq!(store.filter(&[]), vec![0, 1, 2, 3, 4]);
        assert_eq!(
            store.filter(&[Term::iri("Person"), Term::iri("Organization")]),
            vec![1, 2]
        );
        assert_eq!(
            store.filter_within(&[0, 2], &[Term::iri("Person")]),
            vec![0, 2]
        );
    }

    #[test]
    fn duplicate_queries_kept() {
        let q = "SELECT * WHERE { ?x a A }\n";
        let store = load(&q.repeat(3), LogFormat::RawLines).unwrap();
        assert_eq!(store.filter(&[Term::iri("A")]), vec![0, 1, 2]);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil;
    use proptest::prelude::*;
    use proptest::sample::subsequence;

    proptest! {
        #[test]
        fn filter_of_union_is_intersection(
            store in testutil::store(12),
            a in subsequence(testutil::vocabulary(), 1..3),
            b in subsequence(testutil::vocabulary(), 1..3),
        ) {
            let union: Vec<Term> = a.iter().chain(&b).cloned().collect();
            let (fa, fb) = (store.filter(&a), store.filter(&b));
            let both: Vec<QueryId> = fa.iter().copied().filter(|id| fb.contains(id)).collect();
            prop_assert_eq!(store.filter(&union), both);
        }

        #[test]
        fn index_matches_linear_scan(store in testutil::store(12)) {
            for term in testutil::vocabulary() {
                let scanned: Vec<QueryId> = store
                    .queries()
                    .iter()
                    .filter(|q| q.patterns.iter().any(|p| p.terms().contains(&&term)))
                    .map(|q| q.id)
                    .collect();
                prop_assert_eq!(store.postings(&term), &scanned[..]);
            }
            for (term, ids) in store.indexed_terms() {
                prop_assert!(term.is_concrete());
                prop_assert!(!ids.is_empty());
            }
        }
    }
}
