//! Seed derivation.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Child seeds are derived from a parent seed and a stream
//! label with the SplitMix64 finalizer:
//!
//! ```text
//! derive(seed, label) = splitmix64(seed ^ splitmix64(label + 0x9E3779B97F4A7C15))
//! ```
//!
//! so trial `i` of a campaign uses `derive(master, i)` and node `j` of that
//! trial uses `derive(derive(master, i), j)`, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Label reserved for the phase draw of a trial; node labels are `0..k`.
pub const PHASE_STREAM: u64 = u64::MAX;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
