// SPDX-License-Identifier: Apache-2.0

//! Deterministic derivation of independent RNG streams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` whose seed is a
//! hash of a master seed and a tuple of stream coordinates (recruiter,
//! worker, realization index, ...). Streams therefore do not depend on the
//! order in which they are consumed, which keeps parallel code reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `seed`.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, parts))
}

/// Stream tags keep draws for different purposes apart.
pub mod tag {
    pub const SKILL_NOISE: u64 = 0x5343_494C;
    pub const RELATION_NOISE: u64 = 0x5245_4C41;
    pub const SUBSAMPLE: u64 = 0x5355_4253;
    pub const WALK: u64 = 0x5741_4C4B;
    pub const TRAIN: u64 = 0x5452_4149;
    pub const KMEANS: u64 = 0x4B4D_4541;
    pub const TSNE: u64 = 0x5453_4E45;
    pub const GA: u64 = 0x4741_0000;
    pub const PSO: u64 = 0x5053_4F00;
    pub const SYNTH: u64 = 0x5359_4E54;
    pub const REALIZATION: u64 = 0x5245_414C;
}
