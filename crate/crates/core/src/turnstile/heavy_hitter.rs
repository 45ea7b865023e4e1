//! Count-min heavy hitters for vectors that are non-negative at query time.
//!
//! With width `8k`, a row overestimates `f_i` by at least `||f||_1 / (2k)`
//! with probability at most 1/4, so `ceil(log4(domain / delta))` rows keep
//! every light coordinate out with probability `1 - delta`. Heavy coordinates
//! are never missed since estimates only err upward. When `8k` covers the
//! domain the sketch degenerates to one exact row.

use super::{hash3, TurnstileError};

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyHitterSketch {
    domain: usize,
    k: f64,
    delta: f64,
    seed: u64,
    depth: usize,
    width: usize,
    exact: bool,
    counters: Vec<i64>,
    /// `sum_i f_i`, which is `||f||_1` when `f >= 0`.
    total: i64,
}

impl HeavyHitterSketch {
    pub fn new(domain: usize, k: f64, delta: f64, seed: u64) -> Self {
        assert!(domain >= 1, "empty domain");
        assert!(k >= 1.0, "k must be at least 1");
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        let width = (8.0 * k).ceil() as usize;
        let (exact, depth, width) = if width >= domain {
            (true, 1, domain)
        } else {
            let depth = ((domain as f64 / delta).ln() / 4f64.ln()).ceil().max(1.0) as usize;
            (false, depth, width)
        };
        Self {
            domain,
            k,
            delta,
            seed,
            depth,
            width,
            exact,
            counters: vec![0; depth * width],
            total: 0,
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn words(&self) -> u64 {
        self.counters.len() as u64 + 1
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    #[inline]
    fn bucket(&self, row: usize, i: usize) -> usize {
        if self.exact {
            i
        } else {
            row * self.width + (hash3(self.seed, row as u64, i as u64) % self.width as u64) as usize
        }
    }

    pub fn update(&mut self, i: usize, delta: i64) {
        assert!(i < self.domain, "coordinate {i} outside domain {}", self.domain);
        for row in 0..self.depth {
            let b = self.bucket(row, i);
            self.counters[b] += delta;
        }
        self.total += delta;
    }

    pub fn merge(&mut self, other: &HeavyHitterSketch) -> Result<(), TurnstileError> {
        let same = self.domain == other.domain
            && self.k == other.k
            && self.delta == other.delta
            && self.seed == other.seed;
        if !same {
            return Err(TurnstileError::SketchMismatch);
        }
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn estimate(&self, i: usize) -> i64 {
        (0..self.depth)
            .map(|row| self.counters[self.bucket(row, i)])
            .min()
            .expect("depth is at least 1")
    }

    fn is_heavy(&self, i: usize) -> bool {
        self.total > 0 && self.estimate(i) as f64 * self.k >= self.total as f64
    }

    /// Heavy coordinates among `candidates`, in the order given.
    pub fn query_among(&self, candidates: impl IntoIterator<Item = usize>) -> Vec<usize> {
        candidates.into_iter().filter(|&i| self.is_heavy(i)).collect()
    }

    /// Heavy coordinates over the whole domain, ascending.
    pub fn query(&self) -> Vec<usize> {
        self.query_among(0..self.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sole_mass_is_found() {
        for seed in 0..200 {
            let mut h = HeavyHitterSketch::new(1000, 2.0, 0.01, seed);
            h.update(417, 1);
            assert_eq!(h.query(), vec![417]);
        }
    }

    #[test]
    fn cancellation_leaves_nothing() {
        let mut h = HeavyHitterSketch::new(100, 2.0, 0.01, 1);
        h.update(5, 1);
        h.update(5, -1);
        assert!(h.query().is_empty());
    }

    #[test]
    fn wide_sketch_is_exact() {
        let mut h = HeavyHitterSketch::new(16, 4.0, 0.1, 0);
        assert_eq!(h.words(), 17);
        for i in [1, 4, 9] {
            h.update(i, 1);
        }
        assert_eq!(h.query(), vec![1, 4, 9]);
        assert_eq!(h.estimate(2), 0);
    }

    #[test]
    fn depth_follows_failure_budget() {
        let h = HeavyHitterSketch::new(1 << 20, 2.0, 0.01, 0);
        // log4(2^20 / 0.01) = 13.3
        assert_eq!(h.words(), 14 * 16 + 1);
    }

    #[test]
    fn merge_matches_single_stream() {
        let mut a = HeavyHitterSketch::new(500, 3.0, 0.05, 4);
        let mut b = a.clone();
        let mut whole = a.clone();
        for i in 0..50 {
            a.update(i * 7 % 500, 1);
            whole.update(i * 7 % 500, 1);
            b.update(i * 3 % 500, 2);
            whole.update(i * 3 % 500, 2);
        }
        a.merge(&b).unwrap();
        assert_eq!(a, whole);
        assert!(a.merge(&HeavyHitterSketch::new(500, 3.0, 0.05, 5)).is_err());
    }
}
