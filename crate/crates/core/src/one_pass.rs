//! The starting-vertex-oblivious one-pass sampler.
//!
//! [`preprocess`] reads the stream once without knowing where the walk will
//! start. Vertices in `V_full` keep their whole out-neighborhood; every other
//! vertex keeps `tau` neighbors sampled with replacement. Recording stops for
//! good once the stored entries would pass `c2 * tau * n`, and the table is
//! flagged as having operated incorrectly.
//!
//! [`sample_walk`] replays a walk from the table alone: a full vertex draws a
//! fresh uniform entry on every visit, a sampled vertex hands out its entries
//! in order and the walk fails once a vertex runs out.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_stream::{ReplaySource, StreamKind, Vertex, VertexSet};
use crate::reservoir::replacement_step;
use crate::rng::{self, streams};
use crate::walk::Walk;

pub const DEFAULT_C2: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("walk reached dead end {vertex} at step {step}")]
    DeadEnd { vertex: Vertex, step: usize },
    #[error("start vertex {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("stream contains deletions; use the turnstile preprocessor")]
    TurnstileInput,
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("neighbor list of vertex {vertex} exhausted at step {step}")]
    Failure { vertex: Vertex, step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Samples kept per sampled vertex.
    pub tau: usize,
    /// Word cap constant: recording stops past `c2 * tau * n` entries.
    pub c2: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(tau: usize, seed: u64) -> Self {
        Self { tau, c2: DEFAULT_C2, seed }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.tau < 1 {
            return Err(SamplerError::InvalidConfig("tau must be at least 1".into()));
        }
        if !(self.c2 >= 1.0) {
            return Err(SamplerError::InvalidConfig("c2 must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn word_cap(c2: f64, tau: usize, n: usize) -> u64 {
    (c2 * tau as f64 * n as f64).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListMode {
    Full,
    Sampled,
}

/// Per-vertex neighbor lists produced by preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    n: usize,
    tau: usize,
    full: VertexSet,
    offsets: Vec<usize>,
    entries: Vec<Vertex>,
    /// Vertices that saw edges after recording stopped.
    incomplete: VertexSet,
    stored_words: u64,
    cap: u64,
    operated_correctly: bool,
}

impl NeighborTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn full(&self) -> &VertexSet {
        &self.full
    }

    pub fn mode(&self, v: Vertex) -> ListMode {
        if self.full.contains(v) {
            ListMode::Full
        } else {
            ListMode::Sampled
        }
    }

    #[inline]
    pub fn list(&self, v: Vertex) -> &[Vertex] {
        &self.entries[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn is_incomplete(&self, v: Vertex) -> bool {
        self.incomplete.contains(v)
    }

    pub fn stored_words(&self) -> u64 {
        self.stored_words
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn operated_correctly(&self) -> bool {
        self.operated_correctly
    }

    /// Assembles a table from explicit lists (used by the turnstile path).
    pub(crate) fn from_lists(
        tau: usize,
        full: VertexSet,
        lists: Vec<Vec<Vertex>>,
        incomplete: VertexSet,
        cap: u64,
        operated_correctly: bool,
    ) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut entries = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in &lists {
            entries.extend_from_slice(l);
            offsets.push(entries.len());
        }
        let stored_words = entries.len() as u64;
        Self {
            n,
            tau,
            full,
            offsets,
            entries,
            incomplete,
            stored_words,
            cap,
            operated_correctly,
        }
    }

    /// Entries `chunk * width .. (chunk + 1) * width` of `v`'s list, clipped.
    #[inline]
    pub(crate) fn window(&self, v: Vertex, chunk: usize, width: usize) -> &[Vertex] {
        let l = self.list(v);
        let lo = (chunk * width).min(l.len());
        let hi = ((chunk + 1) * width).min(l.len());
        &l[lo..hi]
    }
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    n: usize,
    tau: usize,
    cap: u64,
    stored_words: u64,
    operated_correctly: bool,
    full: VertexSet,
    incomplete: VertexSet,
    lists: Vec<Vec<Vertex>>,
}

impl Serialize for NeighborTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TableRepr {
            n: self.n,
            tau: self.tau,
            cap: self.cap,
            stored_words: self.stored_words,
            operated_correctly: self.operated_correctly,
            full: self.full.clone(),
            incomplete: self.incomplete.clone(),
            lists: (0..self.n).map(|v| self.list(v).to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NeighborTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = TableRepr::deserialize(deserializer)?;
        if r.lists.len() != r.n || r.full.universe() != r.n || r.incomplete.universe() != r.n {
            return Err(D::Error::custom("table dimensions disagree with n"));
        }
        if r.lists.iter().flatten().any(|&v| v >= r.n) {
            return Err(D::Error::custom("list entry out of range"));
        }
        let mut t = NeighborTable::from_lists(r.tau, r.full, r.lists, r.incomplete, r.cap, r.operated_correctly);
        if t.stored_words != r.stored_words {
            return Err(D::Error::custom("stored_words does not match the lists"));
        }
        t.stored_words = r.stored_words;
        Ok(t)
    }
}

/// What the sampling loop needs from a set of lists.
pub(crate) trait NeighborLists {
    fn list(&self, v: Vertex) -> &[Vertex];
    fn is_full(&self, v: Vertex) -> bool;
    fn is_incomplete(&self, v: Vertex) -> bool;
}

impl NeighborLists for NeighborTable {
    #[inline]
    fn list(&self, v: Vertex) -> &[Vertex] {
        NeighborTable::list(self, v)
    }

    #[inline]
    fn is_full(&self, v: Vertex) -> bool {
        self.full.contains(v)
    }

    #[inline]
    fn is_incomplete(&self, v: Vertex) -> bool {
        self.incomplete.contains(v)
    }
}

/// Streaming state of one preprocessing pass.
pub(crate) struct OnePassBuilder<'a> {
    n: usize,
    tau: usize,
    full: &'a VertexSet,
    cap: u64,
    full_lists: Vec<Vec<Vertex>>,
    slots: Vec<u32>,
    seen: Vec<u64>,
    incomplete: VertexSet,
    stored: u64,
    tripped: bool,
}

impl<'a> OnePassBuilder<'a> {
    pub(crate) fn new(n: usize, tau: usize, full: &'a VertexSet, c2: f64) -> Self {
        assert!(n <= u32::MAX as usize, "vertex ids are stored as u32");
        Self {
            n,
            tau,
            full,
            cap: word_cap(c2, tau, n),
            full_lists: vec![Vec::new(); n],
            slots: Vec::new(),
            seen: vec![0; n],
            incomplete: VertexSet::empty(n),
            stored: 0,
            tripped: false,
        }
    }

    #[inline]
    pub(crate) fn observe<R: Rng + ?Sized>(&mut self, (u, v): (Vertex, Vertex), rng: &mut R) {
        if self.tripped {
            self.incomplete.insert(u);
            return;
        }
        if self.full.contains(u) {
            if self.stored + 1 > self.cap {
                self.trip(u);
                return;
            }
            self.stored += 1;
            self.full_lists[u].push(v);
            return;
        }
        if self.seen[u] == 0 {
            if self.stored + self.tau as u64 > self.cap {
                self.trip(u);
                return;
            }
            self.stored += self.tau as u64;
            if self.slots.is_empty() {
                self.slots = vec![0; self.n * self.tau];
            }
        }
        self.seen[u] += 1;
        let range = u * self.tau..(u + 1) * self.tau;
        replacement_step(&mut self.slots[range], self.seen[u], v as u32, rng);
    }

    fn trip(&mut self, u: Vertex) {
        self.tripped = true;
        self.incomplete.insert(u);
        log::debug!("word cap {} reached; recording stopped", self.cap);
    }

    pub(crate) fn finish(self) -> NeighborTable {
        let tau = self.tau;
        let mut offsets = Vec::with_capacity(self.n + 1);
        offsets.push(0);
        let mut entries = Vec::with_capacity(self.stored as usize);
        for v in 0..self.n {
            if self.full.contains(v) {
                entries.extend_from_slice(&self.full_lists[v]);
            } else if self.seen[v] > 0 {
                entries.extend(
                    self.slots[v * tau..(v + 1) * tau]
                        .iter()
                        .map(|&s| s as Vertex),
                );
            }
            offsets.push(entries.len());
        }
        debug_assert_eq!(entries.len() as u64, self.stored);
        NeighborTable {
            n: self.n,
            tau,
            full: self.full.clone(),
            offsets,
            entries,
            incomplete: self.incomplete,
            stored_words: self.stored,
            cap: self.cap,
            operated_correctly: !self.tripped,
        }
    }
}

/// Runs one preprocessing pass. Consumes exactly one replay of `stream`.
pub fn preprocess<S: ReplaySource + ?Sized>(
    stream: &S,
    full: &VertexSet,
    config: &SamplerConfig,
) -> Result<NeighborTable, SamplerError> {
    config.validate()?;
    let mut rng = rng::substream(config.seed, &[streams::PASS1]);
    preprocess_with(stream, config.tau, full, config.c2, &mut rng)
}

pub(crate) fn preprocess_with<S: ReplaySource + ?Sized, R: Rng + ?Sized>(
    stream: &S,
    tau: usize,
    full: &VertexSet,
    c2: f64,
    rng: &mut R,
) -> Result<NeighborTable, SamplerError> {
    if stream.kind() != StreamKind::InsertionOnly {
        return Err(SamplerError::TurnstileInput);
    }
    let n = stream.n();
    assert_eq!(full.universe(), n, "V_full must range over the stream's vertices");
    let mut builder = OnePassBuilder::new(n, tau, full, c2);
    for edge in stream.replay().edges() {
        builder.observe(edge, rng);
    }
    Ok(builder.finish())
}

/// Result of a sampling attempt that did not hit an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkOutcome {
    Walk(Walk),
    /// A sampled vertex ran out of stored entries.
    Failure { vertex: Vertex, step: usize },
}

impl WalkOutcome {
    pub fn walk(&self) -> Option<&Walk> {
        match self {
            WalkOutcome::Walk(w) => Some(w),
            WalkOutcome::Failure { .. } => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, WalkOutcome::Failure { .. })
    }
}

pub(crate) enum Step {
    Next(Vertex),
    Failure,
    DeadEnd,
}

/// Per-walk visit counters, reset lazily between walks.
pub(crate) struct VisitCounters {
    k: Vec<u32>,
    touched: Vec<Vertex>,
}

impl VisitCounters {
    pub(crate) fn new(n: usize) -> Self {
        Self { k: vec![0; n], touched: Vec::new() }
    }

    pub(crate) fn reset(&mut self) {
        for &v in &self.touched {
            self.k[v] = 0;
        }
        self.touched.clear();
    }

    #[inline]
    pub(crate) fn step<L: NeighborLists + ?Sized, R: Rng + ?Sized>(
        &mut self,
        lists: &L,
        cur: Vertex,
        rng: &mut R,
    ) -> Step {
        let list = lists.list(cur);
        if list.is_empty() {
            return if lists.is_incomplete(cur) { Step::Failure } else { Step::DeadEnd };
        }
        if lists.is_full(cur) {
            return Step::Next(list[rng.random_range(0..list.len())]);
        }
        let k = self.k[cur] as usize;
        if k >= list.len() {
            return Step::Failure;
        }
        if k == 0 {
            self.touched.push(cur);
        }
        self.k[cur] += 1;
        Step::Next(list[k])
    }
}

pub(crate) fn sample_from<L: NeighborLists + ?Sized, R: Rng + ?Sized>(
    lists: &L,
    start: Vertex,
    steps: usize,
    counters: &mut VisitCounters,
    rng: &mut R,
) -> Result<WalkOutcome, SamplerError> {
    counters.reset();
    let mut walk = Vec::with_capacity(steps + 1);
    walk.push(start);
    let mut cur = start;
    for step in 0..steps {
        match counters.step(lists, cur, rng) {
            Step::Next(v) => {
                walk.push(v);
                cur = v;
            }
            Step::Failure => return Ok(WalkOutcome::Failure { vertex: cur, step }),
            Step::DeadEnd => return Err(SamplerError::DeadEnd { vertex: cur, step }),
        }
    }
    Ok(WalkOutcome::Walk(Walk(walk)))
}

/// Replays an `steps`-step walk from `start` using only the table.
pub fn sample_walk(
    table: &NeighborTable,
    start: Vertex,
    steps: usize,
    seed: u64,
) -> Result<WalkOutcome, SamplerError> {
    let mut rng = rng::substream(seed, &[streams::SAMPLE]);
    sample_walk_with(table, start, steps, &mut rng)
}

pub fn sample_walk_with<R: Rng + ?Sized>(
    table: &NeighborTable,
    start: Vertex,
    steps: usize,
    rng: &mut R,
) -> Result<WalkOutcome, SamplerError> {
    if start >= table.n() {
        return Err(SamplerError::VertexOutOfRange(start));
    }
    let mut counters = VisitCounters::new(table.n());
    sample_from(table, start, steps, &mut counters, rng)
}

/// The folklore sampler: `tau = L`, nothing recorded in full. Never fails.
pub fn folklore_sample<S: ReplaySource + ?Sized>(
    stream: &S,
    start: Vertex,
    steps: usize,
    seed: u64,
) -> Result<(Walk, NeighborTable), SamplerError> {
    if start >= stream.n() {
        return Err(SamplerError::VertexOutOfRange(start));
    }
    let config = SamplerConfig {
        tau: steps.max(1),
        c2: 1.0,
        seed,
    };
    let table = preprocess(stream, &VertexSet::empty(stream.n()), &config)?;
    match sample_walk(&table, start, steps, seed)? {
        WalkOutcome::Walk(w) => Ok((w, table)),
        WalkOutcome::Failure { vertex, step } => Err(SamplerError::Failure { vertex, step }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_stream::{DirectedGraph, EdgeOrder, EdgeStream};
    use crate::instance_gen::{gen_complete, gen_cycle, gen_star};

    fn stream(g: &DirectedGraph) -> EdgeStream {
        EdgeStream::from_graph(g, &EdgeOrder::AsGiven, 0).unwrap()
    }

    fn self_loop() -> EdgeStream {
        stream(&DirectedGraph::new(1, vec![(0, 0)]).unwrap())
    }

    #[test]
    fn full_recording_keeps_exact_neighborhoods() {
        let g = gen_complete(4, false);
        let s = stream(&g);
        let t = preprocess(&s, &VertexSet::all(4), &SamplerConfig::new(1, 0)).unwrap();
        assert_eq!(t.stored_words(), g.edge_count() as u64);
        let adj = g.out_neighbors();
        for v in 0..4 {
            assert_eq!(t.list(v), adj.of(v));
            assert_eq!(t.mode(v), ListMode::Full);
        }
        assert!(t.operated_correctly());
        assert_eq!(s.pass_count(), 1);
    }

    #[test]
    fn sampled_cycle_lists() {
        let s = stream(&gen_cycle(3));
        let t = preprocess(&s, &VertexSet::empty(3), &SamplerConfig::new(3, 5)).unwrap();
        for v in 0..3 {
            assert_eq!(t.list(v), &[(v + 1) % 3; 3]);
        }
        assert_eq!(t.stored_words(), 9);
    }

    #[test]
    fn cap_is_inclusive() {
        let s = stream(&gen_star(5));
        let config = SamplerConfig { tau: 1, c2: 1.0, seed: 3 };
        let t = preprocess(&s, &VertexSet::empty(5), &config).unwrap();
        assert_eq!(t.cap(), 5);
        assert_eq!(t.stored_words(), 5);
        assert!(t.operated_correctly());
    }

    #[test]
    fn cap_trip_stops_recording() {
        // center full (4 words) + 4 leaves sampled at tau = 1 is 8 > cap 5
        let s = stream(&gen_star(5));
        let config = SamplerConfig { tau: 1, c2: 1.0, seed: 3 };
        let t = preprocess(&s, &VertexSet::from_members(5, [0]), &config).unwrap();
        assert!(!t.operated_correctly());
        assert!(t.stored_words() <= t.cap());
        let incomplete: Vec<_> = (0..5).filter(|&v| t.is_incomplete(v)).collect();
        assert!(!incomplete.is_empty());
        // an unrecorded vertex makes the walk fail rather than report a dead end
        let v = *incomplete.iter().find(|&&v| t.list(v).is_empty()).unwrap();
        assert!(sample_walk(&t, v, 1, 0).unwrap().is_failure());
    }

    #[test]
    fn sample_walk_examples() {
        let s = stream(&gen_cycle(3));
        let t = preprocess(&s, &VertexSet::empty(3), &SamplerConfig::new(2, 0)).unwrap();
        assert_eq!(
            sample_walk(&t, 0, 4, 0).unwrap(),
            WalkOutcome::Walk(Walk(vec![0, 1, 2, 0, 1]))
        );

        let t = preprocess(&self_loop(), &VertexSet::empty(1), &SamplerConfig::new(2, 0)).unwrap();
        assert_eq!(sample_walk(&t, 0, 3, 0).unwrap(), WalkOutcome::Failure { vertex: 0, step: 2 });

        let t = preprocess(&self_loop(), &VertexSet::all(1), &SamplerConfig::new(2, 0)).unwrap();
        let w = sample_walk(&t, 0, 100, 0).unwrap();
        assert_eq!(w.walk().unwrap().vertices(), &[0; 101][..]);
    }

    #[test]
    fn dead_ends_and_bad_starts() {
        let s = stream(&DirectedGraph::new(2, vec![(0, 1)]).unwrap());
        let t = preprocess(&s, &VertexSet::empty(2), &SamplerConfig::new(2, 0)).unwrap();
        assert_eq!(sample_walk(&t, 0, 2, 0), Err(SamplerError::DeadEnd { vertex: 1, step: 1 }));
        assert_eq!(sample_walk(&t, 7, 2, 0), Err(SamplerError::VertexOutOfRange(7)));
        let t = preprocess(&s, &VertexSet::all(2), &SamplerConfig::new(2, 0)).unwrap();
        assert_eq!(sample_walk(&t, 1, 1, 0), Err(SamplerError::DeadEnd { vertex: 1, step: 0 }));
    }

    #[test]
    fn folklore_is_deterministic_on_a_cycle() {
        let s = stream(&gen_cycle(3));
        let (w, t) = folklore_sample(&s, 0, 5, 9).unwrap();
        assert_eq!(w, Walk(vec![0, 1, 2, 0, 1, 2]));
        assert_eq!(t.stored_words(), 15);
        assert_eq!(s.pass_count(), 1);
    }

    #[test]
    fn rejects_turnstile_and_bad_config() {
        let s = stream(&gen_cycle(3)).as_turnstile();
        assert_eq!(
            preprocess(&s, &VertexSet::empty(3), &SamplerConfig::new(1, 0)),
            Err(SamplerError::TurnstileInput)
        );
        let s = stream(&gen_cycle(3));
        assert!(preprocess(&s, &VertexSet::empty(3), &SamplerConfig::new(0, 0)).is_err());
        let bad = SamplerConfig { tau: 1, c2: 0.5, seed: 0 };
        assert!(preprocess(&s, &VertexSet::empty(3), &bad).is_err());
    }

    #[test]
    fn preprocess_is_a_function_of_stream_and_seed() {
        let s = stream(&gen_complete(5, true));
        let full = VertexSet::from_members(5, [2]);
        let a = preprocess(&s, &full, &SamplerConfig::new(4, 17)).unwrap();
        let b = preprocess(&s, &full, &SamplerConfig::new(4, 17)).unwrap();
        assert_eq!(a, b);
        let c = preprocess(&s, &full, &SamplerConfig::new(4, 18)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn table_json_round_trip() {
        let s = stream(&gen_star(4));
        let t = preprocess(&s, &VertexSet::from_members(4, [0]), &SamplerConfig::new(2, 1)).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: NeighborTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let tampered = json.replace("\"stored_words\":9", "\"stored_words\":3");
        assert!(serde_json::from_str::<NeighborTable>(&tampered).is_err());
    }
}
