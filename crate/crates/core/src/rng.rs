//! Seeded randomness.
//!
//! Every random decision in the crate draws from a [`ChaCha8Rng`] whose seed
//! is derived positionally from a master seed with [`derive_seed`]. Work items
//! therefore never share a stream, and results do not depend on the order in
//! which the items are executed.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a string (FNV-1a followed by a SplitMix64 finalizer).
pub fn hash_str(s: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(h)
}

/// Derives a child seed from `base` and an ordered list of coordinates.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = mix64(base);
    for &p in parts {
        h = mix64(h ^ mix64(p));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)`.
pub fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

/// `k` distinct indices from `0..n`, in draw order.
pub fn sample_indices(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    index::sample(rng, n, k.min(n)).into_vec()
}

pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}
