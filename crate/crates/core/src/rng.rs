//! Seeded random streams.
//!
//! Every mechanism instance and generator owns its own [`ChaCha8Rng`]. Streams
//! are derived from a single seed by `(purpose, index)` so independent trials
//! and restarted sub-learners never share randomness.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Purposes of derived streams. Values are part of the determinism contract.
pub mod purpose {
    pub const ADVERSARY: u64 = 1;
    pub const SELECTION: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const SVT: u64 = 4;
    pub const SEGMENT: u64 = 5;
}

/// A splittable source of independent ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, purpose: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index);
        rng
    }

    /// A child stream with its own seed space.
    pub fn child(&self, purpose: u64, index: u64) -> SeedStream {
        use rand::RngCore;
        SeedStream::new(self.rng(purpose, index).next_u64())
    }
}
