//! Seeded random streams.
//!
//! Each stream is a ChaCha20 keystream keyed by the master seed and selected
//! by a 64-bit stream id, so the numbers drawn for one index never depend on
//! how many other indices were consumed before it or on which thread.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha20Rng;

pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn standard_normals(rng: &mut StreamRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
