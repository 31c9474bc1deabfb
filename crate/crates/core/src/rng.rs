//! Seeded random streams.
//!
//! All sampling in this crate draws from ChaCha with 8 rounds, seeded from a
//! 64-bit seed. Worker `w` of a parallel run uses the stream seeded with
//! `seed ^ w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Algorithm identifier recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha8";

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, worker: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed ^ worker)
}
