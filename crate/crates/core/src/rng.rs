//! Seed derivation.
//!
//! Every random draw in a run descends from one 64-bit seed. A stream is
//! identified by a path of tags, e.g. `[trial, SCBS_POINTS]`; the path is
//! folded into a 64-bit key with SplitMix64 and the key seeds a ChaCha12
//! generator. Streams therefore depend only on `(seed, path)`, so serial
//! and parallel executions draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

pub const SCBS_POINTS: u64 = 1;
pub const USER_POINTS: u64 = 2;
pub const GRID_MARKS: u64 = 3;
pub const HARVEST: u64 = 4;
pub const TRACE_PHASE: u64 = 5;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &tag| splitmix64(acc ^ splitmix64(tag.wrapping_add(1))))
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_key(seed, path))
}
