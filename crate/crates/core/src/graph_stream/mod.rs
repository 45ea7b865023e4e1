//! Directed graphs and replayable edge streams.
//!
//! Vertices are dense ids `0..n`. A stream is either insertion-only (each edge
//! once) or turnstile (signed updates whose net count per edge ends in `{0, 1}`).
//! Replays are explicit: every call to [`ReplaySource::replay`] is one pass.

mod format;
mod graph;
mod stream;

pub use format::{
    read_edge_list, read_edge_list_stream, read_stream, read_turnstile, write_edge_list,
    write_stream, write_turnstile,
};
pub use graph::{DirectedGraph, Edge, OutNeighbors, Vertex, VertexSet};
pub use stream::{EdgeOrder, EdgeStream, PassBudget, Replay, ReplaySource, Sign, StreamKind, Update};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge ({u}, {v}) has endpoint outside 0..{n}")]
    VertexOutOfRange { u: Vertex, v: Vertex, n: usize },
    #[error("custom ordering is not a permutation of the edge set")]
    OrderingMismatch,
    #[error("edge ({u}, {v}) ends the stream with net count {net}; expected 0 or 1")]
    InvalidTurnstile { u: Vertex, v: Vertex, net: i64 },
}
