use std::cell::Cell;
use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;

use super::{DirectedGraph, Edge, GraphError};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Insert,
    Delete,
}

impl Sign {
    #[inline]
    pub fn delta(self) -> i64 {
        match self {
            Sign::Insert => 1,
            Sign::Delete => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Update {
    pub edge: Edge,
    pub sign: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    InsertionOnly,
    Turnstile,
}

/// How [`EdgeStream::from_graph`] orders the edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeOrder {
    AsGiven,
    Lexicographic,
    /// Uniform shuffle driven by the seed passed to `from_graph`.
    Shuffle,
    Custom(Vec<Edge>),
}

/// Anything a sampler can take passes over.
pub trait ReplaySource {
    fn n(&self) -> usize;
    fn kind(&self) -> StreamKind;
    /// Starts one full pass over the stream.
    fn replay(&self) -> Replay<'_>;
}

/// A replayable sequence of edge updates.
///
/// The update sequence is shared and immutable; [`EdgeStream::handle`] gives
/// an independent handle with its own pass counter over the same data.
#[derive(Debug)]
pub struct EdgeStream {
    n: usize,
    kind: StreamKind,
    updates: Arc<[Update]>,
    passes: AtomicUsize,
}

impl EdgeStream {
    pub fn from_graph(g: &DirectedGraph, order: &EdgeOrder, seed: u64) -> Result<Self, GraphError> {
        let mut edges = g.edges().to_vec();
        match order {
            EdgeOrder::AsGiven => {}
            EdgeOrder::Lexicographic => edges.sort_unstable(),
            EdgeOrder::Shuffle => edges.shuffle(&mut rng::substream(seed, &[streams::ORDERING])),
            EdgeOrder::Custom(custom) => {
                let want: HashSet<Edge> = edges.iter().copied().collect();
                let got: HashSet<Edge> = custom.iter().copied().collect();
                if custom.len() != edges.len() || want != got {
                    return Err(GraphError::OrderingMismatch);
                }
                edges = custom.clone();
            }
        }
        Ok(Self::from_parts(
            g.n(),
            StreamKind::InsertionOnly,
            edges
                .into_iter()
                .map(|edge| Update { edge, sign: Sign::Insert })
                .collect(),
        ))
    }

    /// An insertion-only stream in exactly the given order.
    pub fn insertion_only(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let g = DirectedGraph::new(n, edges)?;
        Self::from_graph(&g, &EdgeOrder::AsGiven, 0)
    }

    /// A turnstile stream; rejects any edge whose final net count is not 0 or 1.
    pub fn turnstile(n: usize, updates: Vec<Update>) -> Result<Self, GraphError> {
        let mut net: HashMap<Edge, i64> = HashMap::new();
        for up in &updates {
            let (u, v) = up.edge;
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            *net.entry(up.edge).or_default() += up.sign.delta();
        }
        // Report the first offending edge in stream order so errors are stable.
        for up in &updates {
            let c = net[&up.edge];
            if !(0..=1).contains(&c) {
                let (u, v) = up.edge;
                return Err(GraphError::InvalidTurnstile { u, v, net: c });
            }
        }
        Ok(Self::from_parts(n, StreamKind::Turnstile, updates))
    }

    fn from_parts(n: usize, kind: StreamKind, updates: Vec<Update>) -> Self {
        Self {
            n,
            kind,
            updates: updates.into(),
            passes: AtomicUsize::new(0),
        }
    }

    /// Number of replays started on this handle.
    pub fn pass_count(&self) -> usize {
        self.passes.load(Ordering::Relaxed)
    }

    /// A fresh handle over the same updates, with its pass counter at zero.
    pub fn handle(&self) -> Self {
        Self {
            n: self.n,
            kind: self.kind,
            updates: Arc::clone(&self.updates),
            passes: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    /// The updates without counting a pass; for serialization and inspection.
    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    /// Views this stream as turnstile input (insertions become `+` updates).
    pub fn as_turnstile(&self) -> Self {
        Self {
            kind: StreamKind::Turnstile,
            ..self.handle()
        }
    }

    /// The graph left after applying every update, edges in first-surviving order.
    pub fn materialize(&self) -> DirectedGraph {
        let mut net: HashMap<Edge, i64> = HashMap::new();
        let mut order = Vec::new();
        for up in self.updates.iter() {
            let c = net.entry(up.edge).or_insert_with(|| {
                order.push(up.edge);
                0
            });
            *c += up.sign.delta();
        }
        let edges = order.into_iter().filter(|e| net[e] == 1).collect();
        DirectedGraph::new(self.n, edges).expect("stream invariants imply a simple graph")
    }
}

impl ReplaySource for EdgeStream {
    fn n(&self) -> usize {
        self.n
    }

    fn kind(&self) -> StreamKind {
        self.kind
    }

    fn replay(&self) -> Replay<'_> {
        self.passes.fetch_add(1, Ordering::Relaxed);
        Replay {
            inner: self.updates.iter(),
        }
    }
}

/// One pass over a stream.
#[derive(Debug, Clone)]
pub struct Replay<'a> {
    inner: std::slice::Iter<'a, Update>,
}

impl Iterator for Replay<'_> {
    type Item = Update;

    #[inline]
    fn next(&mut self) -> Option<Update> {
        self.inner.next().copied()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

impl ExactSizeIterator for Replay<'_> {}

impl<'a> Replay<'a> {
    /// The inserted edges of an insertion-only pass.
    pub fn edges(self) -> impl Iterator<Item = Edge> + 'a {
        self.map(|up| {
            debug_assert_eq!(up.sign, Sign::Insert);
            up.edge
        })
    }
}

/// Wraps a stream with a hard limit on the number of passes.
///
/// Exceeding the limit panics: a multi-pass algorithm asking for an extra pass
/// is a bug, not a recoverable condition.
#[derive(Debug)]
pub struct PassBudget<'a, S: ReplaySource + ?Sized> {
    stream: &'a S,
    limit: usize,
    used: Cell<usize>,
}

impl<'a, S: ReplaySource + ?Sized> PassBudget<'a, S> {
    pub fn new(stream: &'a S, limit: usize) -> Self {
        Self {
            stream,
            limit,
            used: Cell::new(0),
        }
    }

    pub fn used(&self) -> usize {
        self.used.get()
    }
}

impl<S: ReplaySource + ?Sized> ReplaySource for PassBudget<'_, S> {
    fn n(&self) -> usize {
        self.stream.n()
    }

    fn kind(&self) -> StreamKind {
        self.stream.kind()
    }

    fn replay(&self) -> Replay<'_> {
        let used = self.used.get();
        assert!(
            used < self.limit,
            "pass budget exhausted: requested pass {} of {}",
            used + 1,
            self.limit
        );
        self.used.set(used + 1);
        self.stream.replay()
    }
}
