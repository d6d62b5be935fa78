//! Seeded random sources.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomSource = ChaCha8Rng;

pub fn seeded(seed: u64) -> RandomSource {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream for worker `index` under one master seed.
pub fn stream(seed: u64, index: u64) -> RandomSource {
    let mut rng = seeded(seed);
    rng.set_stream(index);
    rng
}
