//! Random walks over graph edge streams.
//!
//! The crate samples an `L`-step random walk on a directed graph that is only
//! available as a stream of edges. [`one_pass`] is the single-pass sampler
//! that stores `L` samples per vertex. [`two_pass`] reads the stream twice and
//! stores about `sqrt(L)` samples per vertex, recording in full only the
//! vertices that walks keep returning to. [`turnstile`] does the same for
//! streams with deletions using linear sketches.
//!
//! [`oracle`] computes exact walk distributions on small graphs for testing,
//! and [`instance_gen`] builds the graphs used in experiments.

pub mod graph_stream;
pub mod harness;
pub mod instance_gen;
pub mod one_pass;
pub mod oracle;
pub mod reservoir;
pub mod rng;
pub mod turnstile;
pub mod two_pass;
pub mod walk;

pub use graph_stream::{DirectedGraph, EdgeStream, GraphError, Vertex, VertexSet};
pub use one_pass::{NeighborTable, SamplerConfig, SamplerError, WalkOutcome};
pub use two_pass::{SpaceReport, TwoPassConfig};
pub use walk::Walk;
