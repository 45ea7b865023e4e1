//! Exact reference computations for small graphs.
//!
//! Everything here is independent of the streaming samplers: visit
//! probabilities come from an absorbing-state dynamic program, walk
//! distributions from explicit enumeration, and Monte-Carlo quantities from a
//! direct simulator that reads the adjacency lists.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph_stream::{DirectedGraph, OutNeighbors, Vertex, VertexSet};
use crate::rng::{self, streams};
use crate::walk::Walk;

pub const DEFAULT_STEP_CAP: usize = 10_000;
pub const DEFAULT_WALK_BUDGET: u64 = 10_000_000;

/// Slack used when comparing revisit probabilities against 1/3 and 2/3.
const CLASS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("dead end at vertex {vertex}, reachable at step {step}")]
    DeadEnd { vertex: Vertex, step: usize },
    #[error("{steps} steps exceeds the oracle cap of {cap}")]
    CapExceeded { steps: usize, cap: usize },
    #[error("enumeration needs {walks} walks, over the budget of {budget}")]
    BudgetExceeded { walks: u128, budget: u64 },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("empty visit window [{a}, {b}]")]
    InvalidWindow { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub step_cap: usize,
    pub walk_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            step_cap: DEFAULT_STEP_CAP,
            walk_budget: DEFAULT_WALK_BUDGET,
        }
    }
}

/// Uniform out-neighbor transitions.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    adj: OutNeighbors,
    limits: OracleLimits,
}

impl TransitionModel {
    pub fn new(g: &DirectedGraph) -> Self {
        Self::with_limits(g, OracleLimits::default())
    }

    pub fn with_limits(g: &DirectedGraph, limits: OracleLimits) -> Self {
        Self {
            adj: g.out_neighbors(),
            limits,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    pub fn neighbors(&self) -> &OutNeighbors {
        &self.adj
    }

    /// Transition probability `u -> v`; zero out of dead ends.
    pub fn prob(&self, u: Vertex, v: Vertex) -> f64 {
        let d = self.adj.degree(u);
        if d == 0 {
            return 0.0;
        }
        self.adj.of(u).iter().filter(|&&x| x == v).count() as f64 / d as f64
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), OracleError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(OracleError::VertexOutOfRange(v))
        }
    }

    /// Fails if a walk from `u` could stand on a dead end before taking all `steps`.
    pub fn check_no_dead_end(&self, u: Vertex, steps: usize) -> Result<(), OracleError> {
        self.check_vertex(u)?;
        if steps == 0 {
            return Ok(());
        }
        let mut dist = vec![usize::MAX; self.n()];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if dist[x] >= steps {
                continue;
            }
            if self.adj.is_dead_end(x) {
                return Err(OracleError::DeadEnd {
                    vertex: x,
                    step: dist[x],
                });
            }
            for &y in self.adj.of(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        Ok(())
    }

    /// Probability that a `b`-step walk from `u` has `v` at some position in `a..=b`.
    pub fn visit_prob(&self, u: Vertex, v: Vertex, a: usize, b: usize) -> Result<f64, OracleError> {
        self.check_vertex(v)?;
        if a > b {
            return Err(OracleError::InvalidWindow { a, b });
        }
        if b > self.limits.step_cap {
            return Err(OracleError::CapExceeded {
                steps: b,
                cap: self.limits.step_cap,
            });
        }
        self.check_no_dead_end(u, b)?;

        let n = self.n();
        let mut cur = vec![0.0f64; n];
        let mut next = vec![0.0f64; n];
        cur[u] = 1.0;
        let mut absorbed = 0.0;
        for i in 0..=b {
            if i >= a {
                absorbed += cur[v];
                cur[v] = 0.0;
            }
            if i == b {
                break;
            }
            next.iter_mut().for_each(|x| *x = 0.0);
            for (w, &mass) in cur.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let nbrs = self.adj.of(w);
                let share = mass / nbrs.len() as f64;
                for &x in nbrs {
                    next[x] += share;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(absorbed)
    }

    /// Number of distinct `steps`-step walks from `u` (saturating).
    pub fn walk_count(&self, u: Vertex, steps: usize) -> u128 {
        let n = self.n();
        let mut cur = vec![0u128; n];
        cur[u] = 1;
        for _ in 0..steps {
            let mut next = vec![0u128; n];
            for (w, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &x in self.adj.of(w) {
                    next[x] = next[x].saturating_add(c);
                }
            }
            cur = next;
        }
        cur.into_iter().fold(0u128, |acc, c| acc.saturating_add(c))
    }

    /// The exact law of a `steps`-step walk from `start`.
    pub fn walk_distribution(&self, start: Vertex, steps: usize) -> Result<WalkDistribution, OracleError> {
        self.check_no_dead_end(start, steps)?;
        let walks = self.walk_count(start, steps);
        if walks > u128::from(self.limits.walk_budget) {
            return Err(OracleError::BudgetExceeded {
                walks,
                budget: self.limits.walk_budget,
            });
        }
        let mut probs = BTreeMap::new();
        let mut path = vec![start];
        self.enumerate(&mut path, 1.0, steps, &mut probs);
        Ok(WalkDistribution { start, steps, probs })
    }

    fn enumerate(&self, path: &mut Vec<Vertex>, p: f64, steps: usize, out: &mut BTreeMap<Walk, f64>) {
        if path.len() == steps + 1 {
            *out.entry(Walk(path.clone())).or_insert(0.0) += p;
            return;
        }
        let last = *path.last().expect("path starts non-empty");
        let nbrs = self.adj.of(last);
        let q = p / nbrs.len() as f64;
        for &x in nbrs {
            path.push(x);
            self.enumerate(path, q, steps, out);
            path.pop();
        }
    }

    /// One walk drawn directly from the adjacency lists.
    pub fn random_walk<R: Rng + ?Sized>(&self, start: Vertex, steps: usize, rng: &mut R) -> Result<Walk, OracleError> {
        self.check_vertex(start)?;
        let mut walk = Vec::with_capacity(steps + 1);
        walk.push(start);
        let mut cur = start;
        for step in 0..steps {
            let nbrs = self.adj.of(cur);
            if nbrs.is_empty() {
                return Err(OracleError::DeadEnd { vertex: cur, step });
            }
            cur = nbrs[rng.random_range(0..nbrs.len())];
            walk.push(cur);
        }
        Ok(Walk(walk))
    }

    /// Revisit probability `visit_[1, ell](u, u)` for every vertex, plus classes.
    pub fn classify(&self, ell: usize) -> Result<ExactClassification, OracleError> {
        let revisit = (0..self.n())
            .map(|u| self.visit_prob(u, u, 1, ell))
            .collect::<Result<Vec<_>, _>>()?;
        let classes = revisit.iter().map(|&p| VertexClass::from_revisit(p)).collect();
        Ok(ExactClassification { ell, revisit, classes })
    }
}

pub fn visit_prob(g: &DirectedGraph, u: Vertex, v: Vertex, a: usize, b: usize) -> Result<f64, OracleError> {
    TransitionModel::new(g).visit_prob(u, v, a, b)
}

pub fn classify_exact(g: &DirectedGraph, ell: usize) -> Result<ExactClassification, OracleError> {
    TransitionModel::new(g).classify(ell)
}

pub fn exact_walk_distribution(g: &DirectedGraph, start: Vertex, steps: usize) -> Result<WalkDistribution, OracleError> {
    TransitionModel::new(g).walk_distribution(start, steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    Heavy,
    Light,
    /// Revisit probability in `[1/3, 2/3]`: satisfies both definitions.
    Both,
}

impl VertexClass {
    pub fn from_revisit(p: f64) -> Self {
        let heavy = p >= 1.0 / 3.0 - CLASS_EPS;
        let light = p <= 2.0 / 3.0 + CLASS_EPS;
        match (heavy, light) {
            (true, true) => VertexClass::Both,
            (true, false) => VertexClass::Heavy,
            _ => VertexClass::Light,
        }
    }

    pub fn is_heavy(self) -> bool {
        matches!(self, VertexClass::Heavy | VertexClass::Both)
    }

    pub fn is_light(self) -> bool {
        matches!(self, VertexClass::Light | VertexClass::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactClassification {
    pub ell: usize,
    pub revisit: Vec<f64>,
    pub classes: Vec<VertexClass>,
}

impl ExactClassification {
    /// Vertices satisfying the heavy definition (including the `Both` band).
    pub fn heavy(&self) -> VertexSet {
        self.set_where(VertexClass::is_heavy)
    }

    pub fn light(&self) -> VertexSet {
        self.set_where(VertexClass::is_light)
    }

    fn set_where(&self, pred: impl Fn(VertexClass) -> bool) -> VertexSet {
        VertexSet::from_members(
            self.classes.len(),
            self.classes
                .iter()
                .enumerate()
                .filter_map(|(v, &c)| pred(c).then_some(v)),
        )
    }
}

/// Exact law of `RW_L(start)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkDistribution {
    pub start: Vertex,
    pub steps: usize,
    pub probs: BTreeMap<Walk, f64>,
}

impl WalkDistribution {
    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, walk: &[Vertex]) -> f64 {
        self.probs.get(walk).copied().unwrap_or(0.0)
    }

    /// Marginalizes out the final vertex.
    pub fn truncate_last(&self) -> WalkDistribution {
        let mut probs = BTreeMap::new();
        for (w, &p) in &self.probs {
            let head = Walk(w.0[..w.0.len() - 1].to_vec());
            *probs.entry(head).or_insert(0.0) += p;
        }
        WalkDistribution {
            start: self.start,
            steps: self.steps.saturating_sub(1),
            probs,
        }
    }
}

/// A multiset of sampled walks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalWalks {
    counts: HashMap<Walk, u64>,
    total: u64,
}

impl EmpiricalWalks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, walk: &[Vertex]) {
        self.total += 1;
        if let Some(c) = self.counts.get_mut(walk) {
            *c += 1;
        } else {
            self.counts.insert(Walk(walk.to_vec()), 1);
        }
    }

    pub fn merge(&mut self, other: EmpiricalWalks) {
        self.total += other.total;
        for (w, c) in other.counts {
            *self.counts.entry(w).or_insert(0) += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, walk: &[Vertex]) -> u64 {
        self.counts.get(walk).copied().unwrap_or(0)
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, walk: &[Vertex]) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(walk) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Walk, u64)> {
        self.counts.iter().map(|(w, &c)| (w, c))
    }
}

impl<'a> FromIterator<&'a Walk> for EmpiricalWalks {
    fn from_iter<I: IntoIterator<Item = &'a Walk>>(iter: I) -> Self {
        let mut e = EmpiricalWalks::new();
        for w in iter {
            e.record(w.vertices());
        }
        e
    }
}

/// A total-variation estimate with its confidence radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate {
    pub estimate: f64,
    pub radius: f64,
    pub support: usize,
    pub samples: u64,
    /// True when compared against a second empirical sample instead of the exact law.
    pub paired: bool,
}

impl TvEstimate {
    pub fn upper(&self) -> f64 {
        self.estimate + self.radius
    }
}

/// Plug-in TV between an exact law and an empirical sample.
///
/// The radius `sqrt(K / 2N)` uses the exact support size `K`.
pub fn tv_distance(p: &WalkDistribution, q: &EmpiricalWalks) -> TvEstimate {
    assert!(q.total() > 0, "empirical sample must be non-empty");
    let n = q.total() as f64;
    let mut sum = 0.0;
    for (w, &pw) in &p.probs {
        sum += (pw - q.count(w.vertices()) as f64 / n).abs();
    }
    for (w, c) in q.iter() {
        if !p.probs.contains_key(w) {
            sum += c as f64 / n;
        }
    }
    let support = p.support_size();
    TvEstimate {
        estimate: 0.5 * sum,
        radius: (support as f64 / (2.0 * n)).sqrt(),
        support,
        samples: q.total(),
        paired: false,
    }
}

/// TV between two empirical samples, for supports too large to enumerate.
pub fn tv_distance_paired(a: &EmpiricalWalks, b: &EmpiricalWalks) -> TvEstimate {
    assert!(a.total() > 0 && b.total() > 0, "empirical samples must be non-empty");
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let mut sum = 0.0;
    let mut support = 0usize;
    for (w, c) in a.iter() {
        support += 1;
        sum += (c as f64 / na - b.count(w.vertices()) as f64 / nb).abs();
    }
    for (w, c) in b.iter() {
        if a.count(w.vertices()) == 0 {
            support += 1;
            sum += c as f64 / nb;
        }
    }
    let k = support as f64;
    TvEstimate {
        estimate: 0.5 * sum,
        radius: (k / (2.0 * na)).sqrt() + (k / (2.0 * nb)).sqrt(),
        support,
        samples: a.total().min(b.total()),
        paired: true,
    }
}

/// Histogram of how many times an `L`-step walk visits a vertex (positions `1..=L`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VisitHistogram {
    pub counts: BTreeMap<usize, u64>,
    pub trials: u64,
}

impl VisitHistogram {
    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum();
        s / self.trials as f64
    }

    /// Fraction of trials with strictly more than `k` visits.
    pub fn frequency_above(&self, k: usize) -> f64 {
        let c: u64 = self.counts.range(k + 1..).map(|(_, &c)| c).sum();
        c as f64 / self.trials as f64
    }
}

const MC_CHUNK: u64 = 8192;

/// Monte-Carlo visit counts; chunked with derived seeds so results do not
/// depend on the thread pool.
pub fn visit_count_distribution(
    g: &DirectedGraph,
    start: Vertex,
    target: Vertex,
    steps: usize,
    trials: u64,
    seed: u64,
) -> Result<VisitHistogram, OracleError> {
    let model = TransitionModel::new(g);
    model.check_vertex(target)?;
    model.check_no_dead_end(start, steps)?;
    let chunks = trials.div_ceil(MC_CHUNK);
    let partial: Vec<BTreeMap<usize, u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::substream(seed, &[streams::MONTE_CARLO, c]);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut hist = BTreeMap::new();
            let adj = model.neighbors();
            for _ in 0..len {
                let mut cur = start;
                let mut visits = 0usize;
                for _ in 0..steps {
                    let nbrs = adj.of(cur);
                    cur = nbrs[rng.random_range(0..nbrs.len())];
                    visits += usize::from(cur == target);
                }
                *hist.entry(visits).or_insert(0) += 1;
            }
            hist
        })
        .collect();
    let mut counts = BTreeMap::new();
    for h in partial {
        for (k, c) in h {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    Ok(VisitHistogram { counts, trials })
}

/// `trials` walks from the direct simulator, chunked like [`visit_count_distribution`].
pub fn reference_samples(
    g: &DirectedGraph,
    start: Vertex,
    steps: usize,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalWalks, OracleError> {
    let model = TransitionModel::new(g);
    model.check_no_dead_end(start, steps)?;
    let chunks = trials.div_ceil(MC_CHUNK);
    let parts: Vec<Result<EmpiricalWalks, OracleError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::substream(seed, &[streams::MONTE_CARLO, c]);
            let mut e = EmpiricalWalks::new();
            for _ in 0..MC_CHUNK.min(trials - c * MC_CHUNK) {
                e.record(model.random_walk(start, steps, &mut rng)?.vertices());
            }
            Ok(e)
        })
        .collect();
    let mut out = EmpiricalWalks::new();
    for p in parts {
        out.merge(p?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance_gen::{gen_complete, gen_cycle, gen_star};
    use proptest::prelude::*;

    fn self_loop() -> DirectedGraph {
        DirectedGraph::new(1, vec![(0, 0)]).unwrap()
    }

    /// Independent check: enumerate every walk recursively and add up the
    /// probability of those that hit `v` inside the window.
    fn brute_visit(adj: &OutNeighbors, u: Vertex, v: Vertex, a: usize, b: usize) -> f64 {
        fn rec(adj: &OutNeighbors, cur: Vertex, pos: usize, p: f64, hit: bool, v: Vertex, a: usize, b: usize) -> f64 {
            let hit = hit || (pos >= a && cur == v);
            if pos == b {
                return if hit { p } else { 0.0 };
            }
            let nbrs = adj.of(cur);
            nbrs.iter()
                .map(|&x| rec(adj, x, pos + 1, p / nbrs.len() as f64, hit, v, a, b))
                .sum()
        }
        rec(adj, u, 0, 1.0, false, v, a, b)
    }

    #[test]
    fn visit_prob_examples() {
        assert_eq!(visit_prob(&self_loop(), 0, 0, 1, 5).unwrap(), 1.0);
        assert_eq!(visit_prob(&gen_cycle(3), 0, 0, 1, 2).unwrap(), 0.0);
        // leaf -> center w.p. 1, center -> same leaf w.p. 1/4
        let star = gen_star(5);
        assert!((visit_prob(&star, 1, 1, 1, 2).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn visit_prob_errors() {
        let g = DirectedGraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(
            visit_prob(&g, 0, 1, 0, 2),
            Err(OracleError::DeadEnd { vertex: 1, step: 1 })
        );
        // one step is fine: the walk never has to leave vertex 1
        assert_eq!(visit_prob(&g, 0, 1, 0, 1), Ok(1.0));
        assert!(matches!(
            visit_prob(&gen_cycle(3), 0, 0, 0, DEFAULT_STEP_CAP + 1),
            Err(OracleError::CapExceeded { .. })
        ));
        assert!(matches!(
            visit_prob(&gen_cycle(3), 0, 0, 3, 2),
            Err(OracleError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let c = classify_exact(&gen_star(5), 2).unwrap();
        assert_eq!(c.classes[0], VertexClass::Heavy);
        assert!(c.classes[1..].iter().all(|&k| k == VertexClass::Light));
        let c = classify_exact(&gen_cycle(3), 2).unwrap();
        assert!(c.classes.iter().all(|&k| k == VertexClass::Light));
        assert_eq!(classify_exact(&self_loop(), 1).unwrap().classes, vec![VertexClass::Heavy]);
        assert_eq!(VertexClass::from_revisit(0.5), VertexClass::Both);
        assert_eq!(VertexClass::from_revisit(1.0 / 3.0), VertexClass::Both);
    }

    #[test]
    fn walk_distribution_examples() {
        let d = exact_walk_distribution(&gen_cycle(3), 0, 2).unwrap();
        assert_eq!(d.probs.len(), 1);
        assert_eq!(d.prob(&[0, 1, 2]), 1.0);

        let g = DirectedGraph::new(2, vec![(0, 1), (1, 0), (0, 0)]).unwrap();
        let d = exact_walk_distribution(&g, 0, 1).unwrap();
        assert_eq!(d.probs.len(), 2);
        assert_eq!(d.prob(&[0, 0]), 0.5);
        assert_eq!(d.prob(&[0, 1]), 0.5);

        let d = exact_walk_distribution(&gen_star(3), 0, 2).unwrap();
        assert_eq!(d.probs.len(), 2);
        assert_eq!(d.prob(&[0, 1, 0]), 0.5);
        assert_eq!(d.prob(&[0, 2, 0]), 0.5);
    }

    #[test]
    fn walk_distribution_budget() {
        let model = TransitionModel::with_limits(
            &gen_complete(5, true),
            OracleLimits { step_cap: 100, walk_budget: 100 },
        );
        assert!(model.walk_distribution(0, 2).is_ok());
        assert_eq!(
            model.walk_distribution(0, 3),
            Err(OracleError::BudgetExceeded { walks: 125, budget: 100 })
        );
    }

    #[test]
    fn marginal_consistency() {
        let g = gen_complete(4, false);
        for steps in 1..=4 {
            let full = exact_walk_distribution(&g, 0, steps).unwrap();
            let shorter = exact_walk_distribution(&g, 0, steps - 1).unwrap();
            let marg = full.truncate_last();
            assert_eq!(marg.probs.len(), shorter.probs.len());
            for (w, p) in &shorter.probs {
                assert!((marg.prob(w.vertices()) - p).abs() < 1e-12);
            }
            assert!((full.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tv_examples() {
        let p = exact_walk_distribution(&gen_cycle(3), 0, 2).unwrap();
        let mut q = EmpiricalWalks::new();
        q.record(&[0, 1, 2]);
        assert_eq!(tv_distance(&p, &q).estimate, 0.0);

        let mut other = EmpiricalWalks::new();
        other.record(&[0, 2, 1]);
        assert_eq!(tv_distance(&p, &other).estimate, 1.0);

        // uniform over two walks vs 10^6 seeded samples from it
        let g = DirectedGraph::new(2, vec![(0, 1), (1, 0), (0, 0)]).unwrap();
        let p = exact_walk_distribution(&g, 0, 1).unwrap();
        let q = reference_samples(&g, 0, 1, 1_000_000, 11).unwrap();
        let tv = tv_distance(&p, &q);
        assert!(tv.estimate <= 0.01, "{tv:?}");
        assert!(!tv.paired);
    }

    #[test]
    fn paired_tv_is_symmetric_and_flagged() {
        let g = gen_complete(3, false);
        let a = reference_samples(&g, 0, 3, 20_000, 1).unwrap();
        let b = reference_samples(&g, 0, 3, 20_000, 2).unwrap();
        let ab = tv_distance_paired(&a, &b);
        let ba = tv_distance_paired(&b, &a);
        assert!((ab.estimate - ba.estimate).abs() < 1e-12);
        assert!(ab.paired);
        assert!(ab.estimate <= ab.radius);
    }

    #[test]
    fn visit_count_examples() {
        let h = visit_count_distribution(&gen_cycle(3), 0, 0, 6, 1000, 1).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(2, 1000)]));
        let h = visit_count_distribution(&self_loop(), 0, 0, 5, 1000, 1).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(5, 1000)]));

        // exact mean is 5 * 1/4; per-step indicator variance bounds the sd
        let trials = 100_000u64;
        let h = visit_count_distribution(&gen_star(5), 0, 1, 10, trials, 7).unwrap();
        // visits ~ Binomial(5, 1/4): variance 5 * 1/4 * 3/4
        let sigma = (5.0 * 0.25 * 0.75 / trials as f64).sqrt();
        assert!((h.mean() - 1.25).abs() <= 3.0 * sigma, "mean {}", h.mean());
    }

    #[test]
    fn visit_count_is_deterministic_and_rejects_dead_ends() {
        let g = gen_star(6);
        let a = visit_count_distribution(&g, 1, 2, 12, 20_000, 5).unwrap();
        let b = visit_count_distribution(&g, 1, 2, 12, 20_000, 5).unwrap();
        assert_eq!(a, b);
        let dead = DirectedGraph::new(2, vec![(0, 1)]).unwrap();
        assert!(matches!(
            visit_count_distribution(&dead, 0, 1, 3, 10, 0),
            Err(OracleError::DeadEnd { .. })
        ));
    }

    #[test]
    fn visiting_from_position_zero_is_certain() {
        for g in [gen_star(4), gen_cycle(4), gen_complete(3, true)] {
            for u in 0..g.n() {
                for b in 0..5 {
                    assert_eq!(visit_prob(&g, u, u, 0, b).unwrap(), 1.0);
                }
            }
        }
    }

    fn small_graph() -> impl Strategy<Value = DirectedGraph> {
        (1usize..=4).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n * n).prop_map(move |bits| {
                let mut edges: Vec<_> = (0..n * n)
                    .filter(|&i| bits[i])
                    .map(|i| (i / n, i % n))
                    .collect();
                // every vertex gets at least its self-loop or successor so there is no dead end
                for u in 0..n {
                    if !edges.iter().any(|&(a, _)| a == u) {
                        edges.push((u, (u + 1) % n));
                    }
                }
                DirectedGraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn dp_matches_brute_force(g in small_graph(), a in 0usize..4, extra in 0usize..3) {
            let b = a + extra;
            let adj = g.out_neighbors();
            for u in 0..g.n() {
                for v in 0..g.n() {
                    let dp = visit_prob(&g, u, v, a, b).unwrap();
                    let bf = brute_visit(&adj, u, v, a, b);
                    prop_assert!((dp - bf).abs() < 1e-9, "u={u} v={v} dp={dp} bf={bf}");
                }
            }
        }

        #[test]
        fn visit_prob_is_monotone(g in small_graph(), a in 0usize..3, b in 3usize..6) {
            for u in 0..g.n() {
                for v in 0..g.n() {
                    let base = visit_prob(&g, u, v, a, b).unwrap();
                    prop_assert!(visit_prob(&g, u, v, a, b + 1).unwrap() >= base - 1e-12);
                    prop_assert!(visit_prob(&g, u, v, a + 1, b).unwrap() <= base + 1e-12);
                }
            }
        }

        #[test]
        fn row_sums_bounded(g in small_graph(), ell in 0usize..6) {
            for u in 0..g.n() {
                let s: f64 = (0..g.n()).map(|v| visit_prob(&g, u, v, 0, ell).unwrap()).sum();
                prop_assert!(s <= ell as f64 + 1.0 + 1e-9);
            }
        }
    }
}
