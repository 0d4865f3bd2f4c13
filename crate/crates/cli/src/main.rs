//! `isummary`: summaries, evaluation, the Steiner oracle and synthetic logs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isummary_core::coverage::{self, CoverageConfig};
use isummary_core::output::{write_ntriples, write_report};
use isummary_core::rng::Rng;
use isummary_core::steiner::{self, SteinerInstance};
use isummary_core::synth::{self, SyntheticSpec};
use isummary_core::workload::parse_term;
use isummary_core::{
    load_workload, summarize, Error, LogFormat, ParseOptions, Strategy, SummaryRequest, Term,
};

#[derive(Parser)]
#[command(
    name = "isummary",
    version,
    about = "Personalized knowledge-graph summaries from SPARQL query logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the workload around one or more seed terms.
    Summarize(SummarizeArgs),
    /// Cross-validated coverage of the summarization strategies.
    Evaluate(EvaluateArgs),
    /// Compare the cheapest-insertion heuristic with the exact solver.
    Oracle(OracleArgs),
    /// Write a synthetic query log.
    Synth(SynthArgs),
}

#[derive(Args)]
struct LogArgs {
    /// Query log: a file, or a directory of .rq files.
    #[arg(long)]
    log: PathBuf,
    /// raw-lines, urlencoded-lines, rq-directory or tsv.
    #[arg(long, default_value = "raw-lines")]
    format: String,
    /// Column holding the query when --format tsv.
    #[arg(long)]
    tsv_column: Option<usize>,
    /// Prefix applied to bare names such as `Person`, in queries and seeds.
    #[arg(long)]
    base_prefix: Option<String>,
}

impl LogArgs {
    fn options(&self) -> ParseOptions {
        ParseOptions {
            base_prefix: self.base_prefix.clone(),
        }
    }

    fn format(&self) -> Result<LogFormat, Error> {
        match (self.format.as_str(), self.tsv_column) {
            ("tsv", Some(column)) => Ok(LogFormat::Tsv { column }),
            (_, Some(_)) => Err(Error::InvalidRequest(
                "--tsv-column needs --format tsv".into(),
            )),
            (name, None) => name.parse(),
        }
    }
}

#[derive(Args)]
struct SummarizeArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Seed term: `<iri>`, `"literal"`, a prefixed name or a bare name.
    #[arg(long = "seed", required = true)]
    seeds: Vec<String>,
    /// Node budget.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "isummary")]
    strategy: Strategy,
    /// Seed for the random strategy.
    #[arg(long = "rng", default_value_t = 0)]
    rng: u64,
    /// N-Triples output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report with nodes, frequencies and warnings.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Comma-separated node budgets.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Share of the queries used for training.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Seed terms sampled per fold.
    #[arg(long, default_value_t = 10)]
    sample_seeds: usize,
    #[arg(long = "rng", default_value_t = 42)]
    rng: u64,
    #[arg(long, value_delimiter = ',', default_value = "isummary,random")]
    strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 0.5)]
    w_node: f64,
    #[arg(long, default_value_t = 0.5)]
    w_edge: f64,
    /// Share of each training split actually used.
    #[arg(long, default_value_t = 1.0)]
    train_fraction: f64,
    /// CSV with one row per (fold, seed, k, strategy); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Directory of instance files to check in addition to the random ones.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Random instances to draw.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long = "rng", default_value_t = 7)]
    rng: u64,
    #[arg(long, default_value_t = 12)]
    max_nodes: usize,
    #[arg(long, default_value_t = 6)]
    max_k: usize,
    /// Chance of each extra edge beyond the random spanning tree.
    #[arg(long, default_value_t = 0.25)]
    edge_probability: f64,
    /// CSV report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SyntheticSpec::default().n_queries)]
    n_queries: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().classes)]
    classes: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().predicates)]
    predicates: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().instances)]
    instances: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().mean_patterns)]
    mean_patterns: f64,
    #[arg(long, default_value_t = SyntheticSpec::default().skew)]
    skew: f64,
    #[arg(long = "rng", default_value_t = SyntheticSpec::default().rng_seed)]
    rng: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_seed(text: &str, options: &ParseOptions) -> Result<Term, Error> {
    parse_term(text, options)
        .map_err(|e| Error::InvalidRequest(format!("seed {text:?}: {}", e.reason)))
}

fn run_summarize(args: SummarizeArgs) -> Result<(), Error> {
    let options = args.log.options();
    let seeds = args
        .seeds
        .iter()
        .map(|s| parse_seed(s, &options))
        .collect::<Result<Vec<_>, _>>()?;
    let request = SummaryRequest {
        seeds,
        k: args.k,
        strategy: args.strategy,
        random_seed: args.rng,
    };
    request.validate()?;
    let store = load_workload(&args.log.log, args.log.format()?, &options)?;
    let summary = summarize(&store, &request)?;
    for warning in &summary.warnings {
        log::warn!("{warning:?}");
    }
    write_ntriples(&summary, output(args.out.as_deref())?)?;
    if let Some(path) = &args.report {
        write_report(&summary, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let cfg = CoverageConfig {
        w_node: args.w_node,
        w_edge: args.w_edge,
        split_ratio: args.split,
        folds: args.folds,
        sample_seeds: args.sample_seeds,
        rng_seed: args.rng,
        train_fraction: args.train_fraction,
    };
    cfg.validate()?;
    let store = load_workload(&args.log.log, args.log.format()?, &args.log.options())?;
    let table = coverage::evaluate(&store, &cfg, &args.k, &args.strategies)?;
    table.write_csv(output(args.out.as_deref())?)?;
    let mut err = io::stderr().lock();
    writeln!(
        err,
        "{:>4}  {:<9} {:>8} {:>8}",
        "k", "strategy", "mean", "std"
    )?;
    for s in &table.stats {
        writeln!(
            err,
            "{:>4}  {:<9} {:>8.4} {:>8.4}",
            s.k,
            s.strategy.to_string(),
            s.mean,
            s.std_dev
        )?;
    }
    Ok(())
}

fn run_oracle(args: OracleArgs) -> Result<(), Error> {
    let mut instances: Vec<(String, SteinerInstance)> = Vec::new();
    if let Some(dir) = &args.instances {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            let inst = SteinerInstance::parse(&std::fs::read_to_string(&file)?)?;
            instances.push((
                file.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned(),
                inst,
            ));
        }
    }
    let mut rng = Rng::new(args.rng);
    for i in 0..args.trials {
        let inst = SteinerInstance::random_feasible(
            &mut rng,
            args.max_nodes,
            args.max_k,
            args.edge_probability,
        )?;
        instances.push((format!("random-{i}"), inst));
    }

    let mut csv = csv::Writer::from_writer(output(args.out.as_deref())?);
    csv.write_record([
        "instance",
        "nodes",
        "k",
        "terminals",
        "exact_cost",
        "chins_cost",
        "ratio",
        "within_bound",
    ])?;
    let mut violations = 0usize;
    for (name, inst) in &instances {
        let check = steiner::check_bound(inst)?;
        violations += usize::from(!check.within_bound());
        csv.write_record([
            name.clone(),
            inst.graph.node_count().to_string(),
            inst.k.to_string(),
            inst.terminals.len().to_string(),
            format!("{:.6}", check.exact_cost),
            format!("{:.6}", check.chins_cost),
            check
                .ratio()
                .map_or_else(String::new, |r| format!("{r:.6}")),
            check.within_bound().to_string(),
        ])?;
    }
    csv.flush()?;
    eprintln!(
        "{} instances, {violations} above twice the exact cost",
        instances.len()
    );
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Error> {
    let spec = SyntheticSpec {
        n_queries: args.n_queries,
        classes: args.classes,
        predicates: args.predicates,
        instances: args.instances,
        mean_patterns: args.mean_patterns,
        skew: args.skew,
        rng_seed: args.rng,
    };
    synth::generate_synthetic(&spec, output(args.out.as_deref())?)
}

fn configure_threads() {
    let Ok(value) = std::env::var("ISUMMARY_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring ISUMMARY_THREADS={value:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Summarize(a) => run_summarize(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            match e {
                Error::InvalidRequest(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
