//! Graph generators: stars, cycles, complete and random out-regular graphs,
//! the layered pointer-chasing distribution, and the bit-string gadget with its
//! walk-to-string recovery map.

use std::ops::Range;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_stream::{DirectedGraph, EdgeOrder, EdgeStream, Vertex};
use crate::rng::{self, streams};
use crate::walk::Walk;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

fn invalid(msg: impl Into<String>) -> GenError {
    GenError::InvalidParams(msg.into())
}

/// Center `0` joined to leaves `1..n` by edges in both directions.
///
/// # Panics
/// If `n < 2`.
pub fn gen_star(n: usize) -> DirectedGraph {
    assert!(n >= 2, "a star needs at least two vertices");
    let edges = (1..n).flat_map(|i| [(0, i), (i, 0)]).collect();
    DirectedGraph::new(n, edges).expect("star edges are distinct")
}

/// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`; `n = 1` is a single self-loop.
pub fn gen_cycle(n: usize) -> DirectedGraph {
    assert!(n >= 1, "a cycle needs a vertex");
    DirectedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).expect("cycle edges are distinct")
}

/// All ordered pairs `u != v`, plus self-loops if asked.
pub fn gen_complete(n: usize, self_loops: bool) -> DirectedGraph {
    let edges = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| self_loops || u != v)
        .collect();
    DirectedGraph::new(n, edges).expect("complete edges are distinct")
}

/// Every vertex picks a uniform `d_out`-subset of `V` (self-loops possible).
pub fn gen_random_graph(n: usize, d_out: usize, seed: u64) -> Result<DirectedGraph, GenError> {
    if d_out > n {
        return Err(invalid(format!("out-degree {d_out} exceeds n = {n}")));
    }
    let mut rng = rng::substream(seed, &[streams::GENERATOR]);
    let mut edges = Vec::with_capacity(n * d_out);
    for u in 0..n {
        let mut targets = index::sample(&mut rng, n, d_out).into_vec();
        targets.sort_unstable();
        edges.extend(targets.into_iter().map(|v| (u, v)));
    }
    Ok(DirectedGraph::new(n, edges).expect("subsets have distinct members"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardInstanceParams {
    /// Vertices per layer (every layer but the first).
    pub n: usize,
    /// Pass parameter; the instance has `p + 2` layers.
    pub p: usize,
    /// Out-degree of the middle layers, given directly.
    pub delta: usize,
    pub seed: u64,
}

/// A draw from the layered pointer-chasing distribution.
#[derive(Debug)]
pub struct HardInstance {
    pub graph: DirectedGraph,
    /// Edges of the last layer first, the start vertex's single edge last.
    pub stream: EdgeStream,
    pub start: Vertex,
    /// Vertex id range of each layer, first layer (`{start}`) first.
    pub layers: Vec<Range<Vertex>>,
    pub params: HardInstanceParams,
}

#[derive(Debug, Serialize)]
pub struct HardInstanceSidecar<'a> {
    pub kind: &'static str,
    pub params: &'a HardInstanceParams,
    pub start: Vertex,
    pub layers: Vec<[Vertex; 2]>,
}

impl HardInstance {
    pub fn sidecar(&self) -> HardInstanceSidecar<'_> {
        HardInstanceSidecar {
            kind: "layered",
            params: &self.params,
            start: self.start,
            layers: self.layers.iter().map(|r| [r.start, r.end]).collect(),
        }
    }
}

/// Layers `V_1 = {0}`, then `V_2, ..., V_{p+2}` with `n` vertices each,
/// numbered layer-major.
pub fn gen_hard_instance(params: HardInstanceParams) -> Result<HardInstance, GenError> {
    let HardInstanceParams { n, p, delta, seed } = params;
    if p < 1 || n < 1 {
        return Err(invalid("need p >= 1 and n >= 1"));
    }
    if delta < 1 || delta > n {
        return Err(invalid(format!("delta must lie in 1..={n}, got {delta}")));
    }
    let layer_count = p + 2;
    let mut layers = vec![0..1];
    for i in 0..p + 1 {
        layers.push(1 + i * n..1 + (i + 1) * n);
    }
    let total = 1 + (p + 1) * n;
    let mut rng = rng::substream(seed, &[streams::GENERATOR]);

    // by_layer[i] holds E_{i+1}: edges leaving layer i (0-based)
    let mut by_layer: Vec<Vec<(Vertex, Vertex)>> = vec![Vec::new(); layer_count];
    by_layer[0].push((0, layers[1].start + rng.random_range(0..n)));
    for i in 1..layer_count - 1 {
        let next = layers[i + 1].start;
        for v in layers[i].clone() {
            let mut s = index::sample(&mut rng, n, delta).into_vec();
            s.sort_unstable();
            by_layer[i].extend(s.into_iter().map(|t| (v, next + t)));
        }
    }
    by_layer[layer_count - 1].extend(layers[layer_count - 1].clone().map(|v| (v, 0)));

    let edges: Vec<_> = by_layer.into_iter().rev().flatten().collect();
    let graph = DirectedGraph::new(total, edges).expect("layered edges are distinct");
    let stream = EdgeStream::from_graph(&graph, &EdgeOrder::AsGiven, 0).expect("as-given order");
    Ok(HardInstance {
        graph,
        stream,
        start: 0,
        layers,
        params,
    })
}

/// A `tau x tau` bit matrix, row-major: bit `(i, j)` (1-based) sits at
/// index `(i - 1) * tau + (j - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetParams {
    pub tau: usize,
    pub bits: Vec<bool>,
}

impl GadgetParams {
    pub fn new(tau: usize, bits: Vec<bool>) -> Result<Self, GenError> {
        if tau == 0 || bits.len() != tau * tau {
            return Err(invalid(format!(
                "need tau >= 1 and tau^2 = {} bits, got {}",
                tau * tau,
                bits.len()
            )));
        }
        Ok(Self { tau, bits })
    }

    pub fn from_str_bits(tau: usize, s: &str) -> Result<Self, GenError> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("bit string contains {other:?}"))),
            })
            .collect::<Result<_, _>>()?;
        Self::new(tau, bits)
    }

    pub fn random(tau: usize, seed: u64) -> Self {
        let mut rng = rng::substream(seed, &[streams::GENERATOR, 1]);
        let bits = (0..tau * tau).map(|_| rng.random::<bool>()).collect();
        Self { tau, bits }
    }

    /// Bit `(i, j)`, both 1-based.
    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.bits[(i - 1) * self.tau + (j - 1)]
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Vertex id of `V_{1,i}` (1-based `i`).
pub fn gadget_left(i: usize) -> Vertex {
    i - 1
}

/// Vertex id of `V_{2,j}` (1-based `j`, up to `tau + 1`).
pub fn gadget_right(tau: usize, j: usize) -> Vertex {
    tau + j - 1
}

#[derive(Debug)]
pub struct IndexGadget {
    pub graph: DirectedGraph,
    pub stream: EdgeStream,
    /// `V_{2, tau+1}`.
    pub start: Vertex,
    pub params: GadgetParams,
}

#[derive(Debug, Serialize)]
pub struct GadgetSidecar {
    pub kind: &'static str,
    pub tau: usize,
    pub bits: String,
    pub start: Vertex,
    pub layers: Vec<[Vertex; 2]>,
}

impl IndexGadget {
    pub fn sidecar(&self) -> GadgetSidecar {
        let tau = self.params.tau;
        GadgetSidecar {
            kind: "index_gadget",
            tau,
            bits: bits_to_string(&self.params.bits),
            start: self.start,
            layers: vec![[0, tau], [tau, 2 * tau + 1]],
        }
    }
}

/// Two layers: `V_1` with `tau` vertices and `V_2` with `tau + 1`.
/// Every `V_{2,j}` (`j <= tau`) points at every `V_{1,i}`; `V_{1,i} -> V_{2,j}`
/// exists iff bit `(i, j)` is set; `V_{2,tau+1}` is joined both ways to all of `V_1`.
/// Edges stream in lexicographic order.
pub fn gen_index_gadget(params: GadgetParams) -> IndexGadget {
    let tau = params.tau;
    let hub = gadget_right(tau, tau + 1);
    let mut edges = Vec::new();
    for i in 1..=tau {
        for j in 1..=tau {
            edges.push((gadget_right(tau, j), gadget_left(i)));
            if params.bit(i, j) {
                edges.push((gadget_left(i), gadget_right(tau, j)));
            }
        }
        edges.push((gadget_left(i), hub));
        edges.push((hub, gadget_left(i)));
    }
    let graph = DirectedGraph::new(2 * tau + 1, edges).expect("gadget edges are distinct");
    let stream = EdgeStream::from_graph(&graph, &EdgeOrder::Lexicographic, 0).expect("lexicographic order");
    IndexGadget {
        graph,
        stream,
        start: hub,
        params,
    }
}

/// Bit `(i, j)` is set iff the walk crosses `V_{1,i} -> V_{2,j}`.
pub fn recover_string(walk: &Walk, tau: usize) -> Vec<bool> {
    let mut bits = vec![false; tau * tau];
    for (a, b) in walk.transitions() {
        if a < tau && (tau..2 * tau).contains(&b) {
            bits[a * tau + (b - tau)] = true;
        }
    }
    bits
}

/// Walk length `ceil(8 tau^2 ln(tau^2 / eps))` for a per-string miss budget `eps`.
pub fn default_gadget_steps(tau: usize, eps: f64) -> usize {
    let t2 = (tau * tau) as f64;
    (8.0 * t2 * (t2 / eps).ln()).ceil() as usize
}
