//! The two-pass sampler.
//!
//! The first pass runs `gamma` folklore preprocessors at horizon
//! `ell = ceil(sqrt(L))` and uses their tables to estimate, for every vertex,
//! how often a short walk comes back to it. Vertices that come back at least
//! half the time are recorded in full by the second pass; every other vertex
//! keeps `gamma * ell` samples.

use serde::{Deserialize, Serialize};

use crate::graph_stream::{PassBudget, ReplaySource, Vertex, VertexSet};
use crate::one_pass::{self, sample_from, NeighborTable, SamplerError, VisitCounters, WalkOutcome};
use crate::rng::{self, streams};

pub const DEFAULT_C1: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPassConfig {
    /// Walk length `L`.
    pub steps: usize,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
}

impl TwoPassConfig {
    pub fn new(steps: usize, delta: f64, seed: u64) -> Self {
        Self {
            steps,
            delta,
            c1: DEFAULT_C1,
            c2: one_pass::DEFAULT_C2,
            seed,
        }
    }

    pub fn ell(&self) -> usize {
        ceil_sqrt(self.steps)
    }

    pub fn gamma(&self) -> usize {
        gamma(self.c1, self.delta)
    }

    pub fn samples_per_vertex(&self) -> usize {
        self.gamma() * self.ell()
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidConfig(m.to_string()));
        if self.steps < 1 {
            return bad("L must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return bad("c1 must be positive");
        }
        if !(self.c2 >= 1.0) || !self.c2.is_finite() {
            return bad("c2 must be at least 1");
        }
        Ok(())
    }

    fn warn_if_delta_large(&self, n: usize) {
        static WARNED: std::sync::Once = std::sync::Once::new();
        if n > 0 && self.delta >= 1.0 / n as f64 {
            // once per process; trial batches would otherwise repeat it
            WARNED.call_once(|| {
                log::warn!("delta = {} is not below 1/n = {}; accuracy is not guaranteed", self.delta, 1.0 / n as f64)
            });
        }
    }
}

pub fn ceil_sqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r < x {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r
}

pub fn gamma(c1: f64, delta: f64) -> usize {
    ((c1 * (1.0 / delta).log2()).ceil() as usize).max(1)
}

/// First-pass estimate of which vertices walks keep returning to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyLightEstimate {
    pub gamma: usize,
    pub ell: usize,
    /// Trials (out of `gamma`) in which a walk from `u` came back to `u`.
    pub revisits: Vec<usize>,
    pub heavy: VertexSet,
    /// Vertices whose every trial walk hit a dead end.
    pub dead_end_vertices: Vec<Vertex>,
}

impl HeavyLightEstimate {
    pub fn n(&self) -> usize {
        self.revisits.len()
    }

    pub fn weight(&self, u: Vertex) -> f64 {
        self.revisits[u] as f64 / self.gamma as f64
    }

    pub fn light(&self) -> VertexSet {
        self.heavy.complement()
    }
}

/// Runs the revisit trials on a table holding `gamma` windows of `ell`
/// entries per vertex.
pub(crate) fn estimate_from_table(table: &NeighborTable, gamma: usize, ell: usize) -> HeavyLightEstimate {
    let n = table.n();
    debug_assert!(table.full().is_empty() && (0..n).all(|v| !table.is_incomplete(v)));
    let mut visits = Vec::with_capacity(ell);
    let mut revisits = vec![0usize; n];
    let mut dead_end_vertices = Vec::new();
    for u in 0..n {
        let mut dead = 0;
        for j in 0..gamma {
            match revisit_trial(table, u, j, ell, &mut visits) {
                Trial::Revisit => revisits[u] += 1,
                Trial::NoRevisit => {}
                Trial::DeadEnd => dead += 1,
            }
        }
        if dead == gamma {
            log::debug!("every trial walk from {u} hit a dead end");
            dead_end_vertices.push(u);
        }
    }
    let heavy = VertexSet::from_members(n, (0..n).filter(|&u| 2 * revisits[u] >= gamma));
    HeavyLightEstimate {
        gamma,
        ell,
        revisits,
        heavy,
        dead_end_vertices,
    }
}

enum Trial {
    Revisit,
    NoRevisit,
    DeadEnd,
}

/// The one-pass sampler on window `j`, stopped at the first return to `u`.
/// Every list is sampled, so the `k`-th departure from a vertex takes its
/// `k`-th entry.
#[inline]
fn revisit_trial(table: &NeighborTable, u: Vertex, j: usize, ell: usize, visits: &mut Vec<(Vertex, usize)>) -> Trial {
    visits.clear();
    let mut cur = u;
    for _ in 0..ell {
        let list = table.window(cur, j, ell);
        if list.is_empty() {
            return Trial::DeadEnd;
        }
        let k = match visits.iter_mut().find(|(v, _)| *v == cur) {
            Some((_, k)) => {
                *k += 1;
                *k
            }
            None => {
                visits.push((cur, 0));
                0
            }
        };
        if k >= list.len() {
            return Trial::NoRevisit;
        }
        cur = list[k];
        if cur == u {
            return Trial::Revisit;
        }
    }
    Trial::NoRevisit
}

/// Pass one: `gamma` independent folklore tables at horizon `ell`, packed as
/// one table of `gamma * ell` samples per vertex.
pub fn first_pass<S: ReplaySource + ?Sized>(
    stream: &S,
    config: &TwoPassConfig,
) -> Result<(HeavyLightEstimate, NeighborTable), SamplerError> {
    config.validate()?;
    let (gamma, ell) = (config.gamma(), config.ell());
    let mut rng = rng::substream(config.seed, &[streams::PASS1]);
    let n = stream.n();
    let table = one_pass::preprocess_with(stream, gamma * ell, &VertexSet::empty(n), 1.0, &mut rng)?;
    debug_assert!(table.operated_correctly());
    Ok((estimate_from_table(&table, gamma, ell), table))
}

/// Pass two: heavy vertices in full, `gamma * ell` samples elsewhere.
pub fn second_pass<S: ReplaySource + ?Sized>(
    stream: &S,
    estimate: &HeavyLightEstimate,
    config: &TwoPassConfig,
) -> Result<NeighborTable, SamplerError> {
    config.validate()?;
    let mut rng = rng::substream(config.seed, &[streams::PASS2]);
    one_pass::preprocess_with(stream, config.samples_per_vertex(), &estimate.heavy, config.c2, &mut rng)
}

/// Sampling is the one-pass sampler run on the second-pass table.
pub fn sample(table: &NeighborTable, start: Vertex, steps: usize, seed: u64) -> Result<WalkOutcome, SamplerError> {
    one_pass::sample_walk(table, start, steps, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub pass_count: usize,
    pub pass1_peak_words: u64,
    pub pass2_peak_words: u64,
    pub heavy_count: usize,
    pub gamma: usize,
    pub ell: usize,
    pub operated_correctly: bool,
}

impl SpaceReport {
    pub fn peak_words(&self) -> u64 {
        self.pass1_peak_words.max(self.pass2_peak_words)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub outcome: WalkOutcome,
    pub report: SpaceReport,
    pub estimate: HeavyLightEstimate,
    pub table: NeighborTable,
}

/// Both passes followed by sampling. The stream is replayed exactly twice.
pub fn run_pipeline<S: ReplaySource + ?Sized>(
    stream: &S,
    start: Vertex,
    config: &TwoPassConfig,
) -> Result<PipelineRun, SamplerError> {
    if start >= stream.n() {
        return Err(SamplerError::VertexOutOfRange(start));
    }
    let (estimate, table, report) = preprocess(stream, config)?;
    let mut rng = rng::substream(config.seed, &[streams::SAMPLE]);
    let mut counters = VisitCounters::new(table.n());
    let outcome = sample_from(&table, start, config.steps, &mut counters, &mut rng)?;
    Ok(PipelineRun {
        outcome,
        report,
        estimate,
        table,
    })
}

/// Both passes without sampling.
pub fn preprocess<S: ReplaySource + ?Sized>(
    stream: &S,
    config: &TwoPassConfig,
) -> Result<(HeavyLightEstimate, NeighborTable, SpaceReport), SamplerError> {
    config.validate()?;
    config.warn_if_delta_large(stream.n());
    let budget = PassBudget::new(stream, 2);
    let (estimate, pass1) = first_pass(&budget, config)?;
    let table = second_pass(&budget, &estimate, config)?;
    let report = SpaceReport {
        pass_count: budget.used(),
        pass1_peak_words: pass1.stored_words(),
        pass2_peak_words: table.stored_words(),
        heavy_count: estimate.heavy.len(),
        gamma: config.gamma(),
        ell: config.ell(),
        operated_correctly: table.operated_correctly(),
    };
    Ok((estimate, table, report))
}
