//! Seeded random streams.
//!
//! Every random draw in the crate flows from a `(seed, stream)` pair fed to
//! ChaCha8, a counter-based generator. Independent trials use distinct stream
//! ids, so they can be run in any order or in parallel and still reproduce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of the top-level `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` at sample size `n`.
pub fn trial_stream(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) ^ (trial as u64)
}
