//! Seeded PCG32 random number generator.
//!
//! PCG-XSH-RR with 64-bit state and a 64-bit stream selector. The generator
//! is a small value type: cloning it forks the sequence, and independent
//! streams (not locks) provide concurrency.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MULTIPLIER: u64 = 6364136223846793005;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
    inc: u64,
}

impl Rng {
    /// Generator seeded on `(seed, stream)`. Identical arguments produce the
    /// identical sequence on every platform.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = Rng {
            state: 0,
            inc: (stream << 1) | 1,
        };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(seed);
        rng.next_u32();
        rng
    }

    /// Default stream used when a caller has no reason to pick one.
    pub fn seeded(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old.wrapping_mul(MULTIPLIER).wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    /// Unbiased draw in `[0, bound)` by rejection.
    pub fn next_below(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u32();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// Uniform sample in `[lo, hi)`. Consumes exactly one 32-bit draw.
    pub fn next_uniform<T: Scalar>(&mut self, lo: T, hi: T) -> Result<T> {
        if !(lo < hi) {
            return Err(Error::argument(format!(
                "uniform bounds must satisfy lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(lo + (hi - lo) * T::unit_from_u32(self.next_u32()))
    }

    /// Two independent standard normal samples (Box–Muller). Consumes
    /// exactly two 32-bit draws.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        // u1 in (0, 1] so the log is finite.
        let u1 = (self.next_u32() as f64 + 1.0) * (1.0 / 4_294_967_296.0);
        let u2 = self.next_u32() as f64 * (1.0 / 4_294_967_296.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u32 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Fixed 64-bit mixing function (the splitmix64 finalizer). Used to derive
/// per-epoch and per-purpose seeds from a base seed.
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed for epoch-local decisions: shuffle order, augmentation draws.
pub fn epoch_seed(base_seed: u64, epoch: u64) -> u64 {
    mix64(base_seed ^ epoch)
}
