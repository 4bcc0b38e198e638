//! Seed derivation for reproducible, schedule-independent Monte Carlo runs.
//!
//! Every random stream in the crate is a ChaCha8 stream keyed by a master
//! seed and selected by a stream id, so a block of work can be generated on
//! any thread and still reproduce bit-exactly.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Number of samples drawn from one independent stream.
pub const SAMPLE_BLOCK: usize = 1 << 14;

/// Stream reserved for draws that happen once per run (e.g. the fixed phase
/// vector used when phase randomization is disabled).
pub(crate) const ONCE_STREAM: u64 = u64::MAX;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives the seed for the `index`-th independent unit of work (a grid point,
/// a scheme) from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // Stream ids near u64::MAX are reserved, keep derived seeds away from them.
    let mut rng = stream_rng(master ^ 0x9E37_79B9_7F4A_7C15, index);
    rng.next_u64()
}

/// Uniform angle on `[0, 2π)`.
pub(crate) fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    let phi = rng.gen::<f64>() * TAU;
    // gen() < 1 but the product can round up to TAU
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}
