//! Deterministic randomness.
//!
//! Every random draw in the workbench flows from a [`SeededRng`]: a 64-bit
//! seed plus a 64-bit stream id feeding a ChaCha8 generator (`rand_chacha`
//! 0.3, seed expanded with `SeedableRng::seed_from_u64`). Identical
//! `(seed, stream)` pairs produce identical draw sequences on every platform.
//!
//! Sub-streams are derived by FNV-1a hashing an operation tag and an index
//! into the current stream id, so per-image work can run in any order (or in
//! parallel) without changing results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte slice, chained from `state`.
pub fn fnv1a(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// A reproducible randomness source: seed plus stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Derive an independent sub-stream for `(tag, index)`.
    ///
    /// The derivation hashes the parent stream, the tag bytes and the index,
    /// so distinct tags or indices never collide in practice and the result
    /// does not depend on the order in which siblings are derived.
    pub fn derive(&self, tag: &str, index: u64) -> SeededRng {
        let mut s = fnv1a(FNV_OFFSET, &self.stream.to_le_bytes());
        s = fnv1a(s, tag.as_bytes());
        s = fnv1a(s, &index.to_le_bytes());
        SeededRng {
            seed: self.seed,
            stream: s,
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Collapse `(seed, stream, tag)` into a single 64-bit seed, for APIs
    /// that take a scalar seed.
    pub fn scalar_seed(&self, tag: &str) -> u64 {
        let mut s = fnv1a(FNV_OFFSET, &self.seed.to_le_bytes());
        s = fnv1a(s, &self.stream.to_le_bytes());
        fnv1a(s, tag.as_bytes())
    }
}
