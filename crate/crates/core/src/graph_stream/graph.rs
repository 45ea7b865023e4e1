use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::GraphError;

pub type Vertex = usize;

/// A directed edge `(source, target)`.
pub type Edge = (Vertex, Vertex);

/// A simple directed graph on vertices `0..n`. Self-loops are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, _) in &self.edges {
            deg[u] += 1;
        }
        deg
    }

    pub fn out_neighbors(&self) -> OutNeighbors {
        OutNeighbors::build(self.n, self.edges.iter().copied())
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.edges.contains(&edge)
    }
}

/// Compressed out-adjacency; each vertex's neighbors keep edge-insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutNeighbors {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl OutNeighbors {
    pub fn build(n: usize, edges: impl Iterator<Item = Edge> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for (u, _) in edges.clone() {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0; offsets[n]];
        for (u, v) in edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
        }
        Self { offsets, targets }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn of(&self, u: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: Vertex) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn is_dead_end(&self, u: Vertex) -> bool {
        self.degree(u) == 0
    }
}

/// Membership bitmap over `0..n`; serializes as the sorted list of members.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VertexSet {
    member: Vec<bool>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self { member: vec![false; n] }
    }

    pub fn all(n: usize) -> Self {
        Self { member: vec![true; n] }
    }

    pub fn from_members(n: usize, members: impl IntoIterator<Item = Vertex>) -> Self {
        let mut set = Self::empty(n);
        for v in members {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn insert(&mut self, v: Vertex) {
        self.member[v] = true;
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v))
    }

    pub fn complement(&self) -> Self {
        Self {
            member: self.member.iter().map(|m| !m).collect(),
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            universe: usize,
            members: Vec<Vertex>,
        }
        Repr {
            universe: self.universe(),
            members: self.iter().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            universe: usize,
            members: Vec<Vertex>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if let Some(&bad) = repr.members.iter().find(|&&v| v >= repr.universe) {
            return Err(serde::de::Error::custom(format!(
                "member {bad} outside universe {}",
                repr.universe
            )));
        }
        Ok(Self::from_members(repr.universe, repr.members))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert_eq!(
            DirectedGraph::new(2, vec![(0, 1), (0, 1)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            DirectedGraph::new(2, vec![(0, 5)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn self_loops_are_fine() {
        let g = DirectedGraph::new(1, vec![(0, 0)]).unwrap();
        assert_eq!(g.out_neighbors().of(0), &[0]);
    }

    #[test]
    fn adjacency_keeps_insertion_order() {
        let g = DirectedGraph::new(3, vec![(0, 2), (1, 0), (0, 1)]).unwrap();
        let adj = g.out_neighbors();
        assert_eq!(adj.of(0), &[2, 1]);
        assert_eq!(adj.of(1), &[0]);
        assert!(adj.is_dead_end(2));
    }

    #[test]
    fn vertex_set_json_round_trip() {
        let set = VertexSet::from_members(5, [3, 1]);
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"{"universe":5,"members":[1,3]}"#);
        let back: VertexSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        assert!(serde_json::from_str::<VertexSet>(r#"{"universe":2,"members":[4]}"#).is_err());
    }
}
