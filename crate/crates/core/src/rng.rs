// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams.
//!
//! All randomness flows from explicit `u64` seeds. Sub-streams for trials,
//! nodes and purposes are derived with a SplitMix64 mix so that adding a
//! trial never perturbs the streams of the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a list of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Purpose tags used with [`derive_seed`].
pub mod stream {
    pub const TOPOLOGY: u64 = 1;
    pub const WEIGHTS: u64 = 2;
    pub const SIGNAL: u64 = 3;
    pub const OBSERVATIONS: u64 = 4;
    pub const TRIAL: u64 = 5;
    pub const LEMMA: u64 = 6;
}
