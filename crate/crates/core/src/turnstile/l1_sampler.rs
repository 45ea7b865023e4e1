//! A linear sketch that samples a coordinate with probability proportional to
//! its absolute value.
//!
//! Each repetition subsamples the domain into nested levels (coordinate `i`
//! reaches level `j` with probability `2^-j`) and keeps a small sparse-recovery
//! structure per level: `ROWS` hashed rows of buckets, each bucket holding the
//! sum of values, the value-weighted index sum and a fingerprint modulo
//! `2^61 - 1`. A query peels the shallowest level that decodes completely and
//! picks a recovered coordinate weighted by `|f_i|`.

use serde::{Deserialize, Serialize};

use super::{hash3, TurnstileError};

const ROWS: usize = 3;
const MERSENNE61: u64 = (1 << 61) - 1;

const TAG_LEVEL: u64 = 1;
const TAG_FINGERPRINT: u64 = 2;
const TAG_DRAW: u64 = 3;
const TAG_BUCKET: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1SamplerParams {
    /// Supports up to about this size are recovered at a level.
    pub sparsity: usize,
    /// Independent repetitions; more of them lower the FAIL probability.
    pub reps: usize,
}

impl Default for L1SamplerParams {
    fn default() -> Self {
        Self { sparsity: 16, reps: 4 }
    }
}

impl L1SamplerParams {
    /// The default, shrunk for domains smaller than the default sparsity.
    pub fn for_domain(domain: usize) -> Self {
        let d = Self::default();
        Self {
            sparsity: d.sparsity.min(domain.max(1)),
            ..d
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Cell {
    sum: i64,
    weighted: i64,
    fingerprint: u64,
}

impl Cell {
    fn is_zero(&self) -> bool {
        self.sum == 0 && self.weighted == 0 && self.fingerprint == 0
    }

    #[inline]
    fn add(&mut self, i: usize, delta: i64, z: u64) {
        self.sum += delta;
        self.weighted += delta * i as i64;
        self.fingerprint = add_mod(self.fingerprint, mul_mod(signed_mod(delta), z));
    }

    fn merge(&mut self, other: &Cell) {
        self.sum += other.sum;
        self.weighted += other.weighted;
        self.fingerprint = add_mod(self.fingerprint, other.fingerprint);
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE61 {
        s - MERSENNE61
    } else {
        s
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MERSENNE61 as u128) as u64
}

#[inline]
fn signed_mod(x: i64) -> u64 {
    x.rem_euclid(MERSENNE61 as i64) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1SamplerSketch {
    domain: usize,
    params: L1SamplerParams,
    seed: u64,
    levels: usize,
    width: usize,
    /// `reps * levels * ROWS * width` cells.
    cells: Vec<Cell>,
}

impl L1SamplerSketch {
    pub fn new(domain: usize, params: L1SamplerParams, seed: u64) -> Self {
        assert!(domain >= 1, "empty domain");
        assert!(params.sparsity >= 1 && params.reps >= 1, "degenerate sampler parameters");
        let levels = ceil_log2(domain) + 1;
        let width = 2 * params.sparsity;
        Self {
            domain,
            params,
            seed,
            levels,
            width,
            cells: vec![Cell::default(); params.reps * levels * ROWS * width],
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Counters held, three per bucket.
    pub fn words(&self) -> u64 {
        3 * self.cells.len() as u64
    }

    #[inline]
    fn level_of(&self, rep: usize, i: usize) -> usize {
        let h = hash3(self.seed, (rep as u64) << 8 | TAG_LEVEL, i as u64);
        (h.trailing_zeros() as usize).min(self.levels - 1)
    }

    #[inline]
    fn bucket(&self, rep: usize, level: usize, row: usize, i: usize) -> usize {
        let tag = TAG_BUCKET | (rep as u64) << 40 | (level as u64) << 8 | row as u64;
        (hash3(self.seed, tag, i as u64) % self.width as u64) as usize
    }

    #[inline]
    fn fingerprint(&self, rep: usize, i: usize) -> u64 {
        hash3(self.seed, (rep as u64) << 8 | TAG_FINGERPRINT, i as u64) % MERSENNE61
    }

    #[inline]
    fn level_offset(&self, rep: usize, level: usize) -> usize {
        (rep * self.levels + level) * ROWS * self.width
    }

    /// `f_i += delta`.
    pub fn update(&mut self, i: usize, delta: i64) {
        assert!(i < self.domain, "coordinate {i} outside domain {}", self.domain);
        for rep in 0..self.params.reps {
            let z = self.fingerprint(rep, i);
            for level in 0..=self.level_of(rep, i) {
                let base = self.level_offset(rep, level);
                for row in 0..ROWS {
                    let b = self.bucket(rep, level, row, i);
                    self.cells[base + row * self.width + b].add(i, delta, z);
                }
            }
        }
    }

    /// Adds another sketch built with the same domain, parameters and seed.
    pub fn merge(&mut self, other: &L1SamplerSketch) -> Result<(), TurnstileError> {
        if (self.domain, self.params, self.seed) != (other.domain, other.params, other.seed) {
            return Err(TurnstileError::SketchMismatch);
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.merge(b);
        }
        Ok(())
    }

    /// `sum_i f_i`, read off an unsampled row.
    pub fn total(&self) -> i64 {
        self.cells[..self.width].iter().map(|c| c.sum).sum()
    }

    /// Recovers the support of one level, if it peels completely.
    fn decode(&self, rep: usize, level: usize, scratch: &mut Vec<Cell>) -> Option<Vec<(usize, i64)>> {
        let base = self.level_offset(rep, level);
        scratch.clear();
        scratch.extend_from_slice(&self.cells[base..base + ROWS * self.width]);
        let mut found = Vec::new();
        loop {
            let mut progressed = false;
            for pos in 0..scratch.len() {
                let Some(i) = self.pure(rep, level, pos, &scratch[pos]) else {
                    continue;
                };
                let c = scratch[pos].sum;
                let z = self.fingerprint(rep, i);
                for row in 0..ROWS {
                    let b = self.bucket(rep, level, row, i);
                    scratch[row * self.width + b].add(i, -c, z);
                }
                found.push((i, c));
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        if scratch.iter().all(Cell::is_zero) {
            found.sort_unstable();
            Some(found)
        } else {
            None
        }
    }

    /// The coordinate a bucket holds alone, if it does.
    fn pure(&self, rep: usize, level: usize, pos: usize, cell: &Cell) -> Option<usize> {
        if cell.sum == 0 || cell.weighted % cell.sum != 0 {
            return None;
        }
        let i = cell.weighted / cell.sum;
        if i < 0 || i as usize >= self.domain {
            return None;
        }
        let i = i as usize;
        let (row, b) = (pos / self.width, pos % self.width);
        if self.bucket(rep, level, row, i) != b {
            return None;
        }
        (cell.fingerprint == mul_mod(signed_mod(cell.sum), self.fingerprint(rep, i))).then_some(i)
    }

    /// A coordinate drawn with probability `|f_i| / ||f||_1`, or `None` (FAIL).
    pub fn sample(&self) -> Option<usize> {
        let mut scratch = Vec::with_capacity(ROWS * self.width);
        for level in 0..self.levels {
            for rep in 0..self.params.reps {
                let Some(support) = self.decode(rep, level, &mut scratch) else {
                    continue;
                };
                if support.is_empty() {
                    if level == 0 {
                        // level 0 holds every coordinate: f is zero
                        return None;
                    }
                    continue;
                }
                let mass: u64 = support.iter().map(|&(_, c)| c.unsigned_abs()).sum();
                let draw = hash3(self.seed, (rep as u64) << 8 | TAG_DRAW, level as u64);
                let mut target = ((draw as u128 * mass as u128) >> 64) as u64;
                for &(i, c) in &support {
                    let w = c.unsigned_abs();
                    if target < w {
                        return Some(i);
                    }
                    target -= w;
                }
                unreachable!("draw falls inside the recovered mass");
            }
        }
        None
    }
}

fn ceil_log2(x: usize) -> usize {
    (usize::BITS - x.saturating_sub(1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_levels() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(64), 6);
    }

    #[test]
    fn cancellation_fails() {
        for seed in 0..100 {
            let mut s = L1SamplerSketch::new(10, L1SamplerParams::default(), seed);
            s.update(3, 1);
            s.update(3, -1);
            assert_eq!(s.sample(), None);
            assert_eq!(s.total(), 0);
        }
    }

    #[test]
    fn point_mass() {
        for seed in 0..200 {
            let mut s = L1SamplerSketch::new(50, L1SamplerParams::default(), seed);
            s.update(17, 1);
            assert_eq!(s.sample(), Some(17));
        }
    }

    #[test]
    fn negative_entries_count_by_magnitude() {
        let mut hits = [0u32; 2];
        for seed in 0..4000 {
            let mut s = L1SamplerSketch::new(8, L1SamplerParams::default(), seed);
            s.update(1, -3);
            s.update(6, 1);
            match s.sample() {
                Some(1) => hits[0] += 1,
                Some(6) => hits[1] += 1,
                other => panic!("unexpected {other:?}"),
            }
        }
        // 3 : 1 split, loose bounds
        assert!((2800..3200).contains(&hits[0]), "{hits:?}");
    }

    #[test]
    fn merge_equals_single_stream() {
        let p = L1SamplerParams::default();
        let mut a = L1SamplerSketch::new(40, p, 9);
        let mut b = L1SamplerSketch::new(40, p, 9);
        let mut whole = L1SamplerSketch::new(40, p, 9);
        for i in 0..20 {
            a.update(i, 1);
            whole.update(i, 1);
        }
        for i in 10..30 {
            b.update(i, 2);
            whole.update(i, 2);
        }
        a.merge(&b).unwrap();
        assert_eq!(a, whole);
        let other_seed = L1SamplerSketch::new(40, p, 10);
        assert_eq!(a.merge(&other_seed), Err(TurnstileError::SketchMismatch));
    }

    #[test]
    fn large_support_still_samples() {
        // support far above the sparsity forces deeper levels
        let mut ok = 0;
        for seed in 0..200 {
            let mut s = L1SamplerSketch::new(1000, L1SamplerParams::default(), seed);
            for i in 0..600 {
                s.update(i, 1);
            }
            if let Some(i) = s.sample() {
                assert!(i < 600);
                ok += 1;
            }
        }
        assert!(ok >= 190, "{ok}");
    }

    proptest! {
        #[test]
        fn final_state_ignores_update_order(
            updates in proptest::collection::vec((0usize..16, prop_oneof![Just(1i64), Just(-1i64)]), 0..40),
            seed: u64,
            shuffle_seed: u64,
        ) {
            use rand::seq::SliceRandom;
            let p = L1SamplerParams::default();
            let mut a = L1SamplerSketch::new(16, p, seed);
            for &(i, d) in &updates {
                a.update(i, d);
            }
            let mut permuted = updates.clone();
            permuted.shuffle(&mut crate::rng::substream(shuffle_seed, &[]));
            let mut b = L1SamplerSketch::new(16, p, seed);
            for &(i, d) in &permuted {
                b.update(i, d);
            }
            prop_assert_eq!(a.sample(), b.sample());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn samples_lie_in_support(support in proptest::collection::btree_set(0usize..32, 1..12), seed: u64) {
            let mut s = L1SamplerSketch::new(32, L1SamplerParams::default(), seed);
            for &i in &support {
                s.update(i, 1);
            }
            if let Some(i) = s.sample() {
                prop_assert!(support.contains(&i));
            }
        }
    }
}
