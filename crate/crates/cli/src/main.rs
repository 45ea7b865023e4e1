//! `streamwalk`: generate graphs, sample random walks from edge streams,
//! check samplers against exact walk laws and measure their space.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O or other error |
//! | 2 | invalid arguments or parameters |
//! | 3 | malformed graph or stream input |
//! | 4 | the sampler returned Failure |
//! | 5 | the walk reached a dead end |
//! | 6 | a turnstile sketch failed |
//! | 7 | the exact oracle is over its budget |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use streamwalk::graph_stream::{self, DirectedGraph, EdgeStream, ReplaySource, VertexSet};
use streamwalk::harness::{
    self, Algorithm, BenchSpec, ExperimentSpec, GeneratorSpec, HarnessError, ResolvedConfig,
};
use streamwalk::one_pass::{self, NeighborTable, SamplerConfig, SamplerError, WalkOutcome};
use streamwalk::oracle::{self, OracleError};
use streamwalk::turnstile::{self, TurnstileError};
use streamwalk::two_pass::{self, DEFAULT_C1};
use streamwalk::GraphError;

#[derive(Parser)]
#[command(name = "streamwalk", version, about = "Random walks over graph edge streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge stream.
    Gen(GenArgs),
    /// Sample one walk, either end to end or from a saved table.
    Sample(SampleArgs),
    /// Run only the preprocessing passes and save the neighbor table.
    Preprocess(PreprocessArgs),
    /// Compare many sampler runs with the exact walk distribution.
    Verify(VerifyArgs),
    /// Measure stored words across walk lengths and algorithms.
    Bench(BenchArgs),
    /// Print the exact walk distribution and heavy/light classes.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Edge-list or turnstile file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator such as star:101, cycle:3, complete:4, random:5:2, hard:4:2:2 or gadget:3.
    #[arg(long = "gen")]
    generator: Option<String>,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long, value_enum, default_value = "two-pass")]
    algo: AlgoArg,
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Walk length L.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_C1)]
    c1: f64,
    #[arg(long, default_value_t = one_pass::DEFAULT_C2)]
    c2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Folklore,
    TwoPass,
    Turnstile,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Folklore => Algorithm::Folklore,
            AlgoArg::TwoPass => Algorithm::TwoPass,
            AlgoArg::Turnstile => Algorithm::Turnstile,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    /// Generator such as star:101, cycle:3, complete:4, random:5:2, hard:4:2:2 or gadget:3.
    #[arg(long = "gen")]
    generator: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the stream in the signed turnstile format.
    #[arg(long)]
    turnstile: bool,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write layer metadata for structured instances.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["graph", "generator", "table"])))]
struct SampleArgs {
    /// Edge-list or turnstile file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator such as star:101 or cycle:3.
    #[arg(long = "gen")]
    generator: Option<String>,
    /// Sample from a table written by `preprocess` instead of reading a graph.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    params: Params,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    /// Algorithms to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["folklore", "two-pass"])]
    algo: Vec<AlgoArg>,
    /// Walk lengths, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    steps: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_C1)]
    c1: f64,
    #[arg(long, default_value_t = one_pass::DEFAULT_C2)]
    c2: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Record wall-clock time per row (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    steps: usize,
    /// Revisit horizon for the classification; defaults to ceil(sqrt(L)).
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        fail(1, e)
    }
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure { code, error: error.into() }
}

fn graph_code(e: &GraphError) -> u8 {
    match e {
        GraphError::VertexOutOfRange { .. }
        | GraphError::Parse { .. }
        | GraphError::DuplicateEdge(..)
        | GraphError::OrderingMismatch
        | GraphError::InvalidTurnstile { .. } => 3,
    }
}

fn sampler_code(e: &SamplerError) -> u8 {
    match e {
        SamplerError::DeadEnd { .. } => 5,
        SamplerError::Failure { .. } => 4,
        SamplerError::VertexOutOfRange(_) | SamplerError::InvalidConfig(_) | SamplerError::TurnstileInput => 2,
    }
}

fn oracle_code(e: &OracleError) -> u8 {
    match e {
        OracleError::BudgetExceeded { .. } | OracleError::CapExceeded { .. } => 7,
        OracleError::DeadEnd { .. } => 5,
        OracleError::VertexOutOfRange(_) | OracleError::InvalidWindow { .. } => 2,
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::Invalid(_) | HarnessError::Gen(_) => 2,
            HarnessError::Graph(g) => graph_code(g),
            HarnessError::Sampler(s) => sampler_code(s),
            HarnessError::Turnstile(TurnstileError::SketchFailure { .. }) => 6,
            HarnessError::Turnstile(_) => 1,
            HarnessError::Oracle(o) => oracle_code(o),
        };
        fail(code, e)
    }
}

fn load(source: &Source, seed: u64) -> Result<(DirectedGraph, EdgeStream), Failure> {
    if let Some(path) = &source.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let stream = graph_stream::read_stream(&text).map_err(|e| fail(graph_code(&e), e))?;
        Ok((stream.materialize(), stream))
    } else {
        let spec: GeneratorSpec = source.generator.as_deref().expect("clap enforces a source").parse()?;
        let g = spec.generate(seed)?;
        Ok((g.graph, g.stream))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn experiment(p: &Params, trials: u64) -> ExperimentSpec {
    ExperimentSpec {
        algorithm: p.algo.into(),
        start: p.start,
        steps: p.steps,
        delta: p.delta,
        c1: p.c1,
        c2: p.c2,
        trials,
        seed: p.seed,
    }
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let spec: GeneratorSpec = args.generator.parse()?;
    let g = spec.generate(args.seed)?;
    let text = if args.turnstile {
        graph_stream::write_turnstile(&g.stream.as_turnstile())
    } else {
        graph_stream::write_stream(&g.stream)
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(path) = &args.sidecar {
        let sidecar = g.sidecar.unwrap_or_else(|| json!({ "kind": "plain", "start": g.start }));
        fs::write(path, harness::to_sorted_json(&sidecar)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> Result<(), Failure> {
    let spec = experiment(&args.params, 1);
    let (outcome, report) = if let Some(path) = &args.table {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let saved: serde_json::Value = serde_json::from_str(&text).context("parsing table file")?;
        let table: NeighborTable = serde_json::from_value(saved["table"].clone()).context("parsing table")?;
        let outcome = one_pass::sample_walk(&table, spec.start, spec.steps, spec.seed).map_err(|e| fail(sampler_code(&e), e))?;
        let report = json!({ "config": spec, "table": path, "space": saved["space"] });
        (outcome, report)
    } else {
        let source = Source {
            graph: args.graph.clone(),
            generator: args.generator.clone(),
        };
        let (_, stream) = load(&source, spec.seed)?;
        let r = harness::cmd_sample(&stream, &spec)?;
        let outcome = match (&r.walk, r.failure) {
            (Some(w), _) => WalkOutcome::Walk(w.clone()),
            (None, Some(f)) => WalkOutcome::Failure { vertex: f.vertex, step: f.step },
            (None, None) => unreachable!("a run ends in a walk or a failure"),
        };
        (outcome, serde_json::to_value(&r)?)
    };
    let mut report = report;
    report["walk"] = json!(outcome.walk().map(|w| w.to_string()));
    if let Some(out) = &args.out {
        emit(Some(out), &harness::to_sorted_json(&report))?;
    }
    match outcome {
        WalkOutcome::Walk(w) => {
            println!("{w}");
            Ok(())
        }
        WalkOutcome::Failure { vertex, step } => Err(fail(4, SamplerError::Failure { vertex, step })),
    }
}

fn cmd_preprocess(args: &PreprocessArgs) -> Result<(), Failure> {
    let spec = experiment(&args.params, 1);
    let (_, stream) = load(&args.source, spec.seed)?;
    spec.validate(&stream)?;
    let config = spec.two_pass_config(spec.seed);
    let report = match spec.algorithm {
        Algorithm::Folklore => {
            let c = SamplerConfig { tau: spec.steps, c2: 1.0, seed: spec.seed };
            let table = one_pass::preprocess(&stream, &VertexSet::empty(stream.n()), &c).map_err(HarnessError::from)?;
            json!({ "config": ResolvedConfig::new(&spec, stream.n()), "table": table })
        }
        Algorithm::TwoPass => {
            let (estimate, table, space) = two_pass::preprocess(&stream, &config).map_err(HarnessError::from)?;
            json!({ "config": ResolvedConfig::new(&spec, stream.n()), "estimate": estimate, "table": table, "space": space })
        }
        Algorithm::Turnstile => {
            let pre = turnstile::turnstile_preprocess(&stream, &config).map_err(HarnessError::from)?;
            json!({ "config": ResolvedConfig::new(&spec, stream.n()), "estimate": pre.estimate, "table": pre.table, "space": pre.report })
        }
    };
    emit(args.out.as_deref(), &harness::to_sorted_json(&report))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let spec = experiment(&args.params, args.trials);
    let (graph, stream) = load(&args.source, spec.seed)?;
    let report = harness::cmd_verify(&graph, &stream, &spec)?;
    emit(args.out.as_deref(), &harness::to_sorted_json(&report))
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let spec = BenchSpec {
        algorithms: args.algo.iter().map(|&a| a.into()).collect(),
        steps: args.steps.clone(),
        start: args.start,
        delta: args.delta,
        c1: args.c1,
        c2: args.c2,
        trials: args.trials,
        seed: args.seed,
        timing: args.timing,
    };
    let (graph, stream) = load(&args.source, args.seed)?;
    let report = harness::cmd_bench(&graph, &stream, &spec)?;
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => harness::to_sorted_json(&report),
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), Failure> {
    let (graph, _) = load(&args.source, args.seed)?;
    let ell = args.ell.unwrap_or_else(|| two_pass::ceil_sqrt(args.steps));
    let dist = oracle::exact_walk_distribution(&graph, args.start, args.steps).map_err(HarnessError::from)?;
    let classes = oracle::classify_exact(&graph, ell).map_err(HarnessError::from)?;
    let walks: Vec<_> = dist
        .probs
        .iter()
        .map(|(w, p)| json!({ "walk": w.to_string(), "prob": p }))
        .collect();
    let report = json!({
        "start": args.start,
        "steps": args.steps,
        "support": dist.support_size(),
        "walks": walks,
        "classification": classes,
    });
    emit(args.out.as_deref(), &harness::to_sorted_json(&report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
