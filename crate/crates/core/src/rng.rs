//! Deterministic seeding.
//!
//! Every random draw in the crate comes from a [`SimRng`] seeded with a 64-bit
//! value. Ensemble member `r` of a run with master seed `m` uses
//! [`realization_seed`]`(m, r)`:
//!
//! ```text
//! seed_r = splitmix64(splitmix64(m) ^ (r * 0xD1B54A32D192ED03))
//! ```
//!
//! where `splitmix64` is the standard SplitMix64 output function (increment
//! `0x9E3779B97F4A7C15`). This mapping is part of the output format: changing
//! it changes every published trajectory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn realization_seed(master_seed: u64, realization: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ realization.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn realization_seeds(master_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|r| realization_seed(master_seed, r))
        .collect()
}
