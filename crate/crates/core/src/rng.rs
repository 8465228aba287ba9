//! Deterministic random sub-streams.
//!
//! Every stream is keyed by the run seed plus a short path of integers
//! (stream kind, tuple rank, player index, ...), so draws made on one stream
//! never shift the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream kinds used as the first path component.
pub mod kind {
    pub const REWARD: u64 = 1;
    pub const PLAYER: u64 = 2;
    pub const ENVIRONMENT: u64 = 3;
    pub const ORACLE: u64 = 4;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `seed` with `path` into a 64-bit stream key.
pub fn stream_key(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(stream_key(seed, path))
}
