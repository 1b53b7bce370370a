//! Seeded random number generation.
//!
//! Every stream is a ChaCha20 keystream (`rand_chacha::ChaCha20Rng`) seeded
//! from a 64-bit seed, so a seed reproduces the same numbers on any platform.
//! Child seeds for batches, replications or design cells are obtained with
//! [`derive_seed`], a SplitMix64 finaliser folded over the path of indices.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn stream(seed: u64) -> StreamRng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the sub-stream addressed by `path`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
