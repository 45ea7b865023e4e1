//! Reservoir sampling.
//!
//! [`ReservoirWithoutReplacement`] is Vitter's Algorithm R. Sampling `m` items
//! *with* replacement uses `m` independent capacity-one reservoirs: the first
//! item fills every slot and item `t` then replaces each slot independently
//! with probability `1/t`. The replaced slots are found by jumping ahead
//! geometric distances, so item `t` costs about `m/t + 1` draws and untouched
//! slots are never visited.

use rand::Rng;

/// Feeds the `seen`-th item (1-based) of a stream to the slots of one
/// with-replacement reservoir. Slot contents are meaningless before the
/// first item.
#[inline]
pub fn replacement_step<T: Copy, R: Rng + ?Sized>(slots: &mut [T], seen: u64, item: T, rng: &mut R) {
    debug_assert!(seen >= 1);
    if seen == 1 {
        slots.fill(item);
        return;
    }
    let m = slots.len() as f64;
    // ln P(slot survives)
    let log_keep = (-1.0 / seen as f64).ln_1p();
    let mut pos = 0usize;
    loop {
        let u = 1.0 - rng.random::<f64>();
        // slots passed over before the next replaced one: Geometric(1/seen)
        let skip = u.ln() / log_keep;
        if skip >= m - pos as f64 {
            return;
        }
        // non-negative, so the cast floors
        pos += skip as usize;
        slots[pos] = item;
        pos += 1;
    }
}

/// `m` items sampled uniformly with replacement.
#[derive(Debug, Clone)]
pub struct ReservoirWithReplacement<T> {
    capacity: usize,
    /// Empty until the first item arrives.
    slots: Vec<T>,
    seen: u64,
}

impl<T: Copy> ReservoirWithReplacement<T> {
    pub fn new(m: usize) -> Self {
        Self {
            capacity: m,
            slots: Vec::new(),
            seen: 0,
        }
    }

    pub fn observe<R: Rng + ?Sized>(&mut self, item: T, rng: &mut R) {
        self.seen += 1;
        if self.seen == 1 {
            self.slots = vec![item; self.capacity];
        } else {
            replacement_step(&mut self.slots, self.seen, item, rng);
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Items currently held; never more than `capacity()`.
    pub fn stored(&self) -> usize {
        self.slots.len()
    }

    /// The `m` samples in slot order, or nothing if the stream was empty.
    pub fn finish(self) -> Vec<T> {
        self.slots
    }
}

/// A uniform `m`-subset of the stream (Algorithm R).
#[derive(Debug, Clone)]
pub struct ReservoirWithoutReplacement<T> {
    capacity: usize,
    buffer: Vec<T>,
    seen: u64,
}

impl<T> ReservoirWithoutReplacement<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            buffer: Vec::with_capacity(capacity),
            seen: 0,
        }
    }

    pub fn observe<R: Rng + ?Sized>(&mut self, item: T, rng: &mut R) {
        self.seen += 1;
        if self.buffer.len() < self.capacity {
            self.buffer.push(item);
            return;
        }
        let j = rng.random_range(0..self.seen);
        if (j as usize) < self.capacity {
            self.buffer[j as usize] = item;
        }
        debug_assert!(self.buffer.len() <= self.capacity);
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn stored(&self) -> usize {
        self.buffer.len()
    }

    pub fn finish(self) -> Vec<T> {
        self.buffer
    }
}
