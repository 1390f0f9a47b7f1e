//! Seeded random number generation.
//!
//! Every sampler takes either an explicit seed or a generator handle. Parallel
//! workers derive independent generators with [`split`]: the same 64-bit seed
//! with a distinct ChaCha stream id per worker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for worker `stream` derived from `seed`.
pub fn split(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
