//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Independent streams
//! for chains, grid points and replications are derived from a master seed by
//! [`stream_seed`]: the master seed and each index are folded through the
//! SplitMix64 finalizer in order, so `stream_seed(s, &[g, r])` is a pure
//! function of `(s, g, r)` and distinct index paths give unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of a sub-stream identified by an index path.
pub fn stream_seed(master: u64, path: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &idx in path {
        s = splitmix64(s ^ splitmix64(idx.wrapping_add(GOLDEN)));
    }
    s
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Convenience: RNG for the sub-stream `path` of `master`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    rng_from_seed(stream_seed(master, path))
}
