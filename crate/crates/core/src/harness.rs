//! Experiment plumbing shared by the command-line tool and the tests:
//! graph sources, single runs, seeded trial batches, verification against
//! the oracle and space benchmarks.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_stream::{DirectedGraph, EdgeOrder, EdgeStream, GraphError, ReplaySource, Vertex};
use crate::instance_gen::{self, GadgetParams, GenError, HardInstanceParams};
use crate::one_pass::{self, SamplerConfig, SamplerError, WalkOutcome};
use crate::oracle::{self, EmpiricalWalks, OracleError, TvEstimate, VertexClass};
use crate::rng::{derive_seed, streams};
use crate::turnstile::{self, TurnstileError};
use crate::two_pass::{self, HeavyLightEstimate, SpaceReport, TwoPassConfig};
use crate::walk::Walk;

/// Trials per parallel work unit.
const TRIAL_CHUNK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Sampler(SamplerError),
    #[error(transparent)]
    Turnstile(TurnstileError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl From<SamplerError> for HarnessError {
    fn from(e: SamplerError) -> Self {
        HarnessError::Sampler(e)
    }
}

impl From<TurnstileError> for HarnessError {
    fn from(e: TurnstileError) -> Self {
        match e {
            TurnstileError::Sampler(e) => HarnessError::Sampler(e),
            e => HarnessError::Turnstile(e),
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Folklore,
    TwoPass,
    Turnstile,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Folklore, Algorithm::TwoPass, Algorithm::Turnstile];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Folklore => "folklore",
            Algorithm::TwoPass => "two-pass",
            Algorithm::Turnstile => "turnstile",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown algorithm {s:?}")))
    }
}

/// A named generator with its parameters, e.g. `star:101` or `random:5:2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Star { n: usize },
    Cycle { n: usize },
    Complete { n: usize, self_loops: bool },
    Random { n: usize, d_out: usize },
    Hard { n: usize, p: usize, delta: usize },
    Gadget { tau: usize, bits: Option<String> },
}

impl FromStr for GeneratorSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<usize, HarnessError> {
            rest.get(i)
                .ok_or_else(|| HarnessError::Invalid(format!("generator {s:?} is missing parameter {}", i + 1)))?
                .parse()
                .map_err(|_| HarnessError::Invalid(format!("bad number in generator {s:?}")))
        };
        let arity = |k: usize| -> Result<(), HarnessError> {
            if rest.len() > k {
                invalid(format!("generator {s:?} takes {k} parameter(s)"))
            } else {
                Ok(())
            }
        };
        let spec = match name {
            "star" => GeneratorSpec::Star { n: num(0)? },
            "cycle" => GeneratorSpec::Cycle { n: num(0)? },
            "complete" => GeneratorSpec::Complete { n: num(0)?, self_loops: false },
            "complete-loops" => GeneratorSpec::Complete { n: num(0)?, self_loops: true },
            "random" => GeneratorSpec::Random { n: num(0)?, d_out: num(1)? },
            "hard" => GeneratorSpec::Hard { n: num(0)?, p: num(1)?, delta: num(2)? },
            "gadget" => {
                arity(2)?;
                return Ok(GeneratorSpec::Gadget {
                    tau: num(0)?,
                    bits: rest.get(1).map(|b| b.to_string()),
                });
            }
            _ => return invalid(format!("unknown generator {name:?}")),
        };
        arity(match spec {
            GeneratorSpec::Random { .. } => 2,
            GeneratorSpec::Hard { .. } => 3,
            _ => 1,
        })?;
        Ok(spec)
    }
}

/// A generated graph, its stream and a default start vertex.
#[derive(Debug)]
pub struct Generated {
    pub graph: DirectedGraph,
    pub stream: EdgeStream,
    pub start: Vertex,
    /// Layer metadata for the structured instances.
    pub sidecar: Option<serde_json::Value>,
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<Generated, HarnessError> {
        let plain = |graph: DirectedGraph| -> Result<Generated, HarnessError> {
            let stream = EdgeStream::from_graph(&graph, &EdgeOrder::Lexicographic, seed)?;
            Ok(Generated { graph, stream, start: 0, sidecar: None })
        };
        match *self {
            GeneratorSpec::Star { n } => {
                if n < 2 {
                    return invalid("a star needs at least 2 vertices");
                }
                plain(instance_gen::gen_star(n))
            }
            GeneratorSpec::Cycle { n } => plain(instance_gen::gen_cycle(n)),
            GeneratorSpec::Complete { n, self_loops } => plain(instance_gen::gen_complete(n, self_loops)),
            GeneratorSpec::Random { n, d_out } => plain(instance_gen::gen_random_graph(n, d_out, seed)?),
            GeneratorSpec::Hard { n, p, delta } => {
                let h = instance_gen::gen_hard_instance(HardInstanceParams { n, p, delta, seed })?;
                let sidecar = serde_json::to_value(h.sidecar()).expect("sidecar serializes");
                Ok(Generated { graph: h.graph, stream: h.stream, start: h.start, sidecar: Some(sidecar) })
            }
            GeneratorSpec::Gadget { tau, ref bits } => {
                let params = match bits {
                    Some(b) => GadgetParams::from_str_bits(tau, b)?,
                    None => GadgetParams::random(tau, seed),
                };
                let g = instance_gen::gen_index_gadget(params);
                let sidecar = serde_json::to_value(g.sidecar()).expect("sidecar serializes");
                Ok(Generated { graph: g.graph, stream: g.stream, start: g.start, sidecar: Some(sidecar) })
            }
        }
    }
}

/// One fully resolved experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub start: Vertex,
    pub steps: usize,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(algorithm: Algorithm, steps: usize, seed: u64) -> Self {
        Self {
            algorithm,
            start: 0,
            steps,
            delta: 0.1,
            c1: two_pass::DEFAULT_C1,
            c2: one_pass::DEFAULT_C2,
            trials: 1,
            seed,
        }
    }

    pub fn two_pass_config(&self, seed: u64) -> TwoPassConfig {
        TwoPassConfig {
            steps: self.steps,
            delta: self.delta,
            c1: self.c1,
            c2: self.c2,
            seed,
        }
    }

    /// Checks the spec against a stream before any pass begins.
    pub fn validate<S: ReplaySource + ?Sized>(&self, stream: &S) -> Result<(), HarnessError> {
        if self.start >= stream.n() {
            return invalid(format!("start vertex {} outside 0..{}", self.start, stream.n()));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        match self.algorithm {
            Algorithm::Folklore => {
                if self.steps < 1 {
                    return invalid("L must be at least 1");
                }
                if stream.kind() != crate::graph_stream::StreamKind::InsertionOnly {
                    return invalid("folklore needs an insertion-only stream");
                }
            }
            Algorithm::TwoPass => {
                self.two_pass_config(self.seed).validate()?;
                if stream.kind() != crate::graph_stream::StreamKind::InsertionOnly {
                    return invalid("two-pass needs an insertion-only stream; use turnstile");
                }
            }
            Algorithm::Turnstile => self.two_pass_config(self.seed).validate()?,
        }
        Ok(())
    }

    /// The seed of trial `t`; a single run uses the master seed itself.
    pub fn trial_seed(&self, t: u64) -> u64 {
        if self.trials == 1 {
            self.seed
        } else {
            derive_seed(self.seed, &[streams::MONTE_CARLO, t])
        }
    }
}

/// One run of the chosen algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: WalkOutcome,
    pub report: SpaceReport,
    pub estimate: Option<HeavyLightEstimate>,
}

/// Runs `spec.algorithm` once with `seed` on a fresh handle of `stream`.
pub fn run_once(stream: &EdgeStream, spec: &ExperimentSpec, seed: u64) -> Result<RunResult, HarnessError> {
    let handle = stream.handle();
    let result = match spec.algorithm {
        Algorithm::Folklore => {
            let config = SamplerConfig {
                tau: spec.steps.max(1),
                c2: 1.0,
                seed,
            };
            let table = one_pass::preprocess(&handle, &crate::graph_stream::VertexSet::empty(handle.n()), &config)?;
            let outcome = one_pass::sample_walk(&table, spec.start, spec.steps, seed)?;
            RunResult {
                outcome,
                report: SpaceReport {
                    pass_count: handle.pass_count(),
                    pass1_peak_words: table.stored_words(),
                    pass2_peak_words: 0,
                    heavy_count: 0,
                    gamma: 1,
                    ell: config.tau,
                    operated_correctly: table.operated_correctly(),
                },
                estimate: None,
            }
        }
        Algorithm::TwoPass => {
            let run = two_pass::run_pipeline(&handle, spec.start, &spec.two_pass_config(seed))?;
            RunResult {
                outcome: run.outcome,
                report: run.report,
                estimate: Some(run.estimate),
            }
        }
        Algorithm::Turnstile => {
            let (outcome, pre) = turnstile::turnstile_pipeline(&handle, spec.start, &spec.two_pass_config(seed))?;
            RunResult {
                outcome,
                report: pre.report,
                estimate: Some(pre.estimate),
            }
        }
    };
    debug_assert_eq!(handle.pass_count(), result.report.pass_count);
    Ok(result)
}

/// Aggregate of a batch of seeded runs.
#[derive(Debug, Clone, Default)]
pub struct TrialBatch {
    pub walks: EmpiricalWalks,
    pub failures: u64,
    pub trials: u64,
    /// Largest peak over all runs.
    pub peak_words: u64,
    pub pass_counts: Vec<usize>,
    pub all_operated_correctly: bool,
    /// Per vertex: runs in which it was estimated heavy.
    pub heavy_votes: Vec<u64>,
}

impl TrialBatch {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    fn merge(mut self, other: TrialBatch) -> TrialBatch {
        self.walks.merge(other.walks);
        self.failures += other.failures;
        self.trials += other.trials;
        self.peak_words = self.peak_words.max(other.peak_words);
        for p in other.pass_counts {
            if !self.pass_counts.contains(&p) {
                self.pass_counts.push(p);
            }
        }
        self.pass_counts.sort_unstable();
        self.all_operated_correctly &= other.all_operated_correctly;
        if self.heavy_votes.len() < other.heavy_votes.len() {
            self.heavy_votes.resize(other.heavy_votes.len(), 0);
        }
        for (a, b) in self.heavy_votes.iter_mut().zip(other.heavy_votes) {
            *a += b;
        }
        self
    }
}

/// `spec.trials` runs with per-trial seeds, merged in trial order.
pub fn run_trials(stream: &EdgeStream, spec: &ExperimentSpec) -> Result<TrialBatch, HarnessError> {
    spec.validate(stream)?;
    let chunks = spec.trials.div_ceil(TRIAL_CHUNK);
    let parts: Vec<Result<TrialBatch, HarnessError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut batch = TrialBatch {
                all_operated_correctly: true,
                heavy_votes: vec![0; stream.n()],
                ..TrialBatch::default()
            };
            let end = ((c + 1) * TRIAL_CHUNK).min(spec.trials);
            for t in c * TRIAL_CHUNK..end {
                let run = run_once(stream, spec, spec.trial_seed(t))?;
                batch.trials += 1;
                batch.peak_words = batch.peak_words.max(run.report.peak_words());
                if !batch.pass_counts.contains(&run.report.pass_count) {
                    batch.pass_counts.push(run.report.pass_count);
                }
                batch.all_operated_correctly &= run.report.operated_correctly;
                if let Some(est) = &run.estimate {
                    for v in est.heavy.iter() {
                        batch.heavy_votes[v] += 1;
                    }
                }
                match run.outcome {
                    WalkOutcome::Walk(w) => batch.walks.record(w.vertices()),
                    WalkOutcome::Failure { .. } => batch.failures += 1,
                }
            }
            Ok(batch)
        })
        .collect();
    let mut total = TrialBatch {
        all_operated_correctly: true,
        ..TrialBatch::default()
    };
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total)
}

/// Output of a single `sample` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub config: ResolvedConfig,
    pub walk: Option<Walk>,
    pub failure: Option<FailureInfo>,
    pub space: SpaceReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FailureInfo {
    pub vertex: Vertex,
    pub step: usize,
}

/// The experiment parameters together with the derived ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedConfig {
    #[serde(flatten)]
    pub spec: ExperimentSpec,
    pub n: usize,
    pub gamma: Option<usize>,
    pub ell: Option<usize>,
}

impl ResolvedConfig {
    pub fn new(spec: &ExperimentSpec, n: usize) -> Self {
        let (gamma, ell) = match spec.algorithm {
            Algorithm::Folklore => (None, None),
            _ => {
                let c = spec.two_pass_config(spec.seed);
                (Some(c.gamma()), Some(c.ell()))
            }
        };
        Self { spec: *spec, n, gamma, ell }
    }
}

pub fn cmd_sample(stream: &EdgeStream, spec: &ExperimentSpec) -> Result<SampleReport, HarnessError> {
    let single = ExperimentSpec { trials: 1, ..*spec };
    single.validate(stream)?;
    let run = run_once(stream, &single, single.seed)?;
    let (walk, failure) = match run.outcome {
        WalkOutcome::Walk(w) => (Some(w), None),
        WalkOutcome::Failure { vertex, step } => (None, Some(FailureInfo { vertex, step })),
    };
    Ok(SampleReport {
        config: ResolvedConfig::new(&single, stream.n()),
        walk,
        failure,
        space: run.report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRow {
    pub vertex: Vertex,
    pub exact_revisit: f64,
    pub exact_class: VertexClass,
    /// Fraction of runs in which the vertex was estimated heavy.
    pub estimated_heavy_rate: f64,
    /// Fraction of runs whose estimate for this vertex is consistent with the exact class.
    pub agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: ResolvedConfig,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub tv: TvEstimate,
    /// Whether the estimate is within `delta` (zero for folklore) plus the radius.
    pub tv_within_bound: bool,
    pub pass_counts: Vec<usize>,
    pub peak_words: u64,
    pub classification: Option<Vec<ClassificationRow>>,
}

/// Compares `spec.trials` runs with the exact walk law.
pub fn cmd_verify(graph: &DirectedGraph, stream: &EdgeStream, spec: &ExperimentSpec) -> Result<VerifyReport, HarnessError> {
    spec.validate(stream)?;
    let exact = oracle::exact_walk_distribution(graph, spec.start, spec.steps)?;
    let classes = match spec.algorithm {
        Algorithm::Folklore => None,
        _ => Some(oracle::classify_exact(graph, spec.two_pass_config(spec.seed).ell())?),
    };
    let batch = run_trials(stream, spec)?;
    let tv = if batch.walks.total() > 0 {
        oracle::tv_distance(&exact, &batch.walks)
    } else {
        TvEstimate {
            estimate: 1.0,
            radius: 0.0,
            support: exact.support_size(),
            samples: 0,
            paired: false,
        }
    };
    let allowance = match spec.algorithm {
        Algorithm::Folklore => 0.0,
        _ => spec.delta,
    };
    let classification = classes.map(|c| {
        (0..graph.n())
            .map(|v| {
                let heavy_rate = batch.heavy_votes[v] as f64 / batch.trials as f64;
                let class = c.classes[v];
                let agreement = match class {
                    VertexClass::Both => 1.0,
                    VertexClass::Heavy => heavy_rate,
                    VertexClass::Light => 1.0 - heavy_rate,
                };
                ClassificationRow {
                    vertex: v,
                    exact_revisit: c.revisit[v],
                    exact_class: class,
                    estimated_heavy_rate: heavy_rate,
                    agreement,
                }
            })
            .collect()
    });
    Ok(VerifyReport {
        config: ResolvedConfig::new(spec, graph.n()),
        trials: batch.trials,
        failures: batch.failures,
        failure_rate: batch.failure_rate(),
        tv_within_bound: tv.estimate <= allowance + tv.radius,
        tv,
        pass_counts: batch.pass_counts,
        peak_words: batch.peak_words,
        classification,
    })
}

/// A sweep over walk lengths and algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub algorithms: Vec<Algorithm>,
    pub steps: Vec<usize>,
    pub start: Vertex,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub trials: u64,
    pub seed: u64,
    /// Record wall-clock time per row; off by default so reports are reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    #[serde(rename = "L")]
    pub steps: usize,
    pub delta: f64,
    pub gamma: usize,
    pub ell: usize,
    pub peak_words: u64,
    pub word_bound: Option<u64>,
    pub pass_count: usize,
    pub operated_correctly: bool,
    pub empirical_tv: Option<f64>,
    pub failure_rate: f64,
    pub wall_time: Option<f64>,
}

/// CSV header, in column order.
pub const BENCH_COLUMNS: [&str; 13] = [
    "algorithm",
    "n",
    "L",
    "delta",
    "gamma",
    "ell",
    "peak_words",
    "word_bound",
    "pass_count",
    "operated_correctly",
    "empirical_tv",
    "failure_rate",
    "wall_time",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(BENCH_COLUMNS).expect("in-memory write");
        }
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

/// One row per `(L, algorithm)`, in the order given.
pub fn cmd_bench(graph: &DirectedGraph, stream: &EdgeStream, spec: &BenchSpec) -> Result<BenchReport, HarnessError> {
    if spec.steps.is_empty() {
        return invalid("the L list is empty");
    }
    if spec.algorithms.is_empty() {
        return invalid("no algorithms given");
    }
    let mut rows = Vec::new();
    for &steps in &spec.steps {
        let exact = match oracle::exact_walk_distribution(graph, spec.start, steps) {
            Ok(d) => Some(d),
            Err(OracleError::BudgetExceeded { .. } | OracleError::CapExceeded { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        for &algorithm in &spec.algorithms {
            let exp = ExperimentSpec {
                algorithm,
                start: spec.start,
                steps,
                delta: spec.delta,
                c1: spec.c1,
                c2: spec.c2,
                trials: spec.trials,
                seed: derive_seed(spec.seed, &[steps as u64, algorithm as u64]),
            };
            let clock = Instant::now();
            let batch = run_trials(stream, &exp)?;
            let wall_time = spec.timing.then(|| clock.elapsed().as_secs_f64());
            let (gamma, ell, word_bound) = match algorithm {
                Algorithm::Folklore => (1, steps, None),
                _ => {
                    let c = exp.two_pass_config(exp.seed);
                    let bound = one_pass::word_cap(c.c2, c.samples_per_vertex(), graph.n());
                    (c.gamma(), c.ell(), Some(bound))
                }
            };
            let empirical_tv = match &exact {
                Some(d) if batch.walks.total() > 0 => Some(oracle::tv_distance(d, &batch.walks).estimate),
                _ => None,
            };
            rows.push(BenchRow {
                algorithm,
                n: graph.n(),
                steps,
                delta: spec.delta,
                gamma,
                ell,
                peak_words: batch.peak_words,
                word_bound,
                pass_count: batch.pass_counts.iter().copied().max().unwrap_or(0),
                operated_correctly: batch.all_operated_correctly,
                empirical_tv,
                failure_rate: batch.failure_rate(),
                wall_time,
            });
        }
    }
    Ok(BenchReport { spec: spec.clone(), rows })
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(s: &str) -> Generated {
        s.parse::<GeneratorSpec>().unwrap().generate(0).unwrap()
    }

    #[test]
    fn generator_names() {
        assert_eq!("star:5".parse::<GeneratorSpec>().unwrap(), GeneratorSpec::Star { n: 5 });
        assert_eq!(
            "random:5:2".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::Random { n: 5, d_out: 2 }
        );
        assert!("star".parse::<GeneratorSpec>().is_err());
        assert!("star:5:1".parse::<GeneratorSpec>().is_err());
        assert!("blob:3".parse::<GeneratorSpec>().is_err());
        assert_eq!(gen("gadget:2:1010").start, 4);
        assert!(gen("hard:3:1:2").sidecar.is_some());
    }

    #[test]
    fn folklore_sample_on_cycle() {
        let g = gen("cycle:3");
        let spec = ExperimentSpec::new(Algorithm::Folklore, 5, 0);
        let r = cmd_sample(&g.stream, &spec).unwrap();
        assert_eq!(r.walk.unwrap().to_string(), "0 1 2 0 1 2");
        assert_eq!(r.space.pass_count, 1);
    }

    #[test]
    fn two_pass_sample_reports_two_passes() {
        let g = gen("star:5");
        let spec = ExperimentSpec::new(Algorithm::TwoPass, 4, 1);
        let r = cmd_sample(&g.stream, &spec).unwrap();
        assert_eq!(r.space.pass_count, 2);
        assert!(r.walk.is_some());
        assert_eq!(r.config.gamma, Some(160));
    }

    #[test]
    fn validation_before_any_pass() {
        let g = gen("cycle:3");
        let mut spec = ExperimentSpec::new(Algorithm::TwoPass, 4, 1);
        spec.trials = 0;
        assert!(matches!(cmd_verify(&g.graph, &g.stream, &spec), Err(HarnessError::Invalid(_))));
        spec.trials = 1;
        spec.start = 3;
        assert!(cmd_sample(&g.stream, &spec).is_err());
        assert_eq!(g.stream.pass_count(), 0);
    }

    #[test]
    fn batches_are_deterministic() {
        let g = gen("complete:4");
        let mut spec = ExperimentSpec::new(Algorithm::TwoPass, 3, 9);
        spec.trials = 300;
        let a = run_trials(&g.stream, &spec).unwrap();
        let b = run_trials(&g.stream, &spec).unwrap();
        assert_eq!(a.walks, b.walks);
        assert_eq!(a.pass_counts, vec![2]);
    }

    #[test]
    fn verify_star_classification() {
        let g = gen("star:5");
        let mut spec = ExperimentSpec::new(Algorithm::TwoPass, 4, 2);
        spec.delta = 0.05;
        spec.trials = 200;
        let r = cmd_verify(&g.graph, &g.stream, &spec).unwrap();
        let rows = r.classification.unwrap();
        assert_eq!(rows[0].exact_class, VertexClass::Heavy);
        assert_eq!(rows[0].estimated_heavy_rate, 1.0);
        assert!(r.tv_within_bound);
    }

    #[test]
    fn bench_rows_and_csv() {
        let g = gen("cycle:3");
        let spec = BenchSpec {
            algorithms: vec![Algorithm::Folklore, Algorithm::TwoPass],
            steps: vec![4],
            start: 0,
            delta: 0.1,
            c1: 1.0,
            c2: 8.0,
            trials: 5,
            seed: 0,
            timing: false,
        };
        let r = cmd_bench(&g.graph, &g.stream, &spec).unwrap();
        assert_eq!(r.rows.len(), 2);
        let csv = r.to_csv();
        assert_eq!(csv.lines().next().unwrap(), BENCH_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 3);
        assert!(cmd_bench(&g.graph, &g.stream, &BenchSpec { steps: vec![], ..spec }).is_err());
    }

    #[test]
    fn sorted_json_keys() {
        let g = gen("cycle:3");
        let r = cmd_sample(&g.stream, &ExperimentSpec::new(Algorithm::Folklore, 2, 0)).unwrap();
        let json = to_sorted_json(&r);
        let a = json.find("\"config\"").unwrap();
        let b = json.find("\"space\"").unwrap();
        let c = json.find("\"walk\"").unwrap();
        assert!(a < b && b < c);
    }
}
