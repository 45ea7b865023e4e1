//! Two-pass preprocessing for streams with deletions.
//!
//! Reservoirs cannot forget a deleted edge, so every neighbor sample is drawn
//! by an [`L1SamplerSketch`] over the vertex's out-edge indicator vector, and
//! the heavy vertices' neighborhoods are read back from one
//! [`HeavyHitterSketch`] over all edge slots `u * n + v`. The result is an
//! ordinary [`NeighborTable`].

mod heavy_hitter;
mod l1_sampler;

pub use heavy_hitter::HeavyHitterSketch;
pub use l1_sampler::{L1SamplerParams, L1SamplerSketch};

use thiserror::Error;

use crate::graph_stream::{PassBudget, ReplaySource, Update, Vertex, VertexSet};
use crate::one_pass::{sample_from, NeighborTable, SamplerError, VisitCounters, WalkOutcome};
use crate::rng::{self, derive_seed, mix64, streams};
use crate::two_pass::{estimate_from_table, HeavyLightEstimate, SpaceReport, TwoPassConfig};

/// Failure probability of the heavy-hitter sketch.
pub const DEFAULT_HH_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TurnstileError {
    #[error("sketch failed to produce a sample for vertex {vertex}")]
    SketchFailure { vertex: Vertex },
    #[error("sketches with different shapes or seeds cannot be merged")]
    SketchMismatch,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

#[inline]
pub(crate) fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(seed ^ mix64(a)) ^ b)
}

/// `per_vertex` samplers for every vertex, fed one replay.
struct SamplerBank {
    n: usize,
    per_vertex: usize,
    sketches: Vec<L1SamplerSketch>,
}

impl SamplerBank {
    fn new(n: usize, per_vertex: usize, vertices: &VertexSet, seed: u64, pass: u64) -> Self {
        let params = L1SamplerParams::for_domain(n);
        let mut sketches = Vec::with_capacity(vertices.len() * per_vertex);
        for u in vertices.iter() {
            for j in 0..per_vertex {
                let s = derive_seed(seed, &[streams::SKETCH, pass, u as u64, j as u64]);
                sketches.push(L1SamplerSketch::new(n.max(1), params, s));
            }
        }
        Self {
            n,
            per_vertex,
            sketches,
        }
    }

    fn words(&self) -> u64 {
        self.sketches.iter().map(L1SamplerSketch::words).sum()
    }
}

/// Everything the turnstile path produces besides the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnstilePreprocessed {
    pub estimate: HeavyLightEstimate,
    pub table: NeighborTable,
    pub report: SpaceReport,
}

/// Both passes over a turnstile stream. Replays the stream exactly twice.
pub fn turnstile_preprocess<S: ReplaySource + ?Sized>(
    stream: &S,
    config: &TwoPassConfig,
) -> Result<TurnstilePreprocessed, TurnstileError> {
    config.validate()?;
    let n = stream.n();
    let (gamma, ell) = (config.gamma(), config.ell());
    let per_vertex = gamma * ell;
    let budget = PassBudget::new(stream, 2);

    // pass 1: gamma * ell samplers per vertex
    let everyone = VertexSet::all(n);
    let mut bank = SamplerBank::new(n, per_vertex, &everyone, config.seed, streams::PASS1);
    let index: Vec<Option<usize>> = (0..n).map(Some).collect();
    feed(&mut bank, &index, budget.replay());
    let pass1_words = bank.words();
    let pass1 = read_lists(&bank, &everyone, &index)?;
    let pass1 = NeighborTable::from_lists(per_vertex, VertexSet::empty(n), pass1, VertexSet::empty(n), u64::MAX, true);
    let estimate = estimate_from_table(&pass1, gamma, ell);
    drop(bank);

    // pass 2: one heavy-hitter sketch for heavy sources, fresh samplers elsewhere
    let heavy = estimate.heavy.clone();
    let light = heavy.complement();
    let k = config.c2 * per_vertex as f64 * n as f64;
    let hh_seed = derive_seed(config.seed, &[streams::SKETCH, streams::PASS2]);
    let mut hh = HeavyHitterSketch::new((n * n).max(1), k.max(1.0), DEFAULT_HH_DELTA, hh_seed);
    let mut bank = SamplerBank::new(n, per_vertex, &light, config.seed, streams::PASS2);
    let mut index = vec![None; n];
    for (pos, u) in light.iter().enumerate() {
        index[u] = Some(pos);
    }
    for Update { edge: (u, v), sign } in budget.replay() {
        if heavy.contains(u) {
            hh.update(u * n + v, sign.delta());
        } else {
            feed_one(&mut bank, &index, u, v, sign.delta());
        }
    }
    let pass2_words = bank.words() + hh.words();
    let mut lists = read_lists(&bank, &light, &index)?;
    for u in heavy.iter() {
        lists[u] = hh.query_among((0..n).map(|v| u * n + v)).into_iter().map(|e| e % n).collect();
    }
    let cap = crate::one_pass::word_cap(config.c2, per_vertex, n);
    let stored: u64 = lists.iter().map(|l| l.len() as u64).sum();
    let operated_correctly = hh.total() as f64 <= k && stored <= cap;
    if !operated_correctly {
        log::warn!("heavy-vertex mass {} or stored words {stored} over budget", hh.total());
    }
    let table = NeighborTable::from_lists(per_vertex, heavy, lists, VertexSet::empty(n), cap, operated_correctly);
    let report = SpaceReport {
        pass_count: budget.used(),
        pass1_peak_words: pass1_words,
        pass2_peak_words: pass2_words,
        heavy_count: estimate.heavy.len(),
        gamma,
        ell,
        operated_correctly,
    };
    Ok(TurnstilePreprocessed {
        estimate,
        table,
        report,
    })
}

fn feed<I: Iterator<Item = Update>>(bank: &mut SamplerBank, index: &[Option<usize>], updates: I) {
    for Update { edge: (u, v), sign } in updates {
        feed_one(bank, index, u, v, sign.delta());
    }
}

#[inline]
fn feed_one(bank: &mut SamplerBank, index: &[Option<usize>], u: Vertex, v: Vertex, delta: i64) {
    if let Some(pos) = index[u] {
        let per = bank.per_vertex;
        for s in &mut bank.sketches[pos * per..(pos + 1) * per] {
            s.update(v, delta);
        }
    }
}

/// One sample per sketch; vertices without out-edges get an empty list.
fn read_lists(bank: &SamplerBank, vertices: &VertexSet, index: &[Option<usize>]) -> Result<Vec<Vec<Vertex>>, TurnstileError> {
    let per = bank.per_vertex;
    let mut lists = vec![Vec::new(); bank.n];
    for u in vertices.iter() {
        let pos = index[u].expect("indexed vertex");
        let sketches = &bank.sketches[pos * per..(pos + 1) * per];
        if sketches.first().is_none_or(|s| s.total() == 0) {
            continue;
        }
        lists[u] = sketches
            .iter()
            .map(|s| s.sample().ok_or(TurnstileError::SketchFailure { vertex: u }))
            .collect::<Result<_, _>>()?;
    }
    Ok(lists)
}

/// Preprocessing followed by sampling from `start`.
pub fn turnstile_pipeline<S: ReplaySource + ?Sized>(
    stream: &S,
    start: Vertex,
    config: &TwoPassConfig,
) -> Result<(WalkOutcome, TurnstilePreprocessed), TurnstileError> {
    if start >= stream.n() {
        return Err(SamplerError::VertexOutOfRange(start).into());
    }
    let pre = turnstile_preprocess(stream, config)?;
    let mut rng = rng::substream(config.seed, &[streams::SAMPLE]);
    let mut counters = VisitCounters::new(pre.table.n());
    let outcome = sample_from(&pre.table, start, config.steps, &mut counters, &mut rng)?;
    Ok((outcome, pre))
}
