//! Deterministic RNG stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! base seed plus a small tuple of coordinates (purpose tag, indices). Two
//! computations that use different keys never share a stream, so the order
//! in which work is scheduled cannot change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes. Values are part of the reproducibility contract.
pub(crate) mod tag {
    pub const USER_POSITION: u64 = 1;
    pub const FADING: u64 = 2;
    pub const QPSO_INIT: u64 = 3;
    pub const QPSO_EVOLVE: u64 = 4;
    pub const ACTION_SAMPLE: u64 = 5;
    pub const CRC_SELECT: u64 = 6;
    pub const CRC_EXCHANGE: u64 = 7;
    pub const DROP: u64 = 8;
    pub const HARM_ROUND: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with an ordered list of keys into a new 64-bit seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}
