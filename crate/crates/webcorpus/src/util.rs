//! Seed-derivation helpers shared by every randomized stage.
//!
//! All randomness in the crate flows through [`rand_chacha::ChaCha8Rng`]
//! seeded from values produced here, so results are reproducible across
//! platforms and worker counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; a cheap, well-mixed 64-bit permutation.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives an independent stream seed from a base seed and an index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ mix64(index))
}

/// FNV-1a over arbitrary bytes, folded with a seed.
pub fn hash_bytes(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ mix64(seed);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    mix64(h)
}

/// Record seed for a (global seed, string key, epoch) triple.
pub fn record_seed(global_seed: u64, key: &str, epoch: u64) -> u64 {
    mix64(hash_bytes(global_seed, key.as_bytes()) ^ mix64(epoch.wrapping_add(0x5bd1)))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn record_seed_varies_by_all_inputs() {
        let s = record_seed(1, "doc-1", 0);
        assert_eq!(s, record_seed(1, "doc-1", 0));
        assert_ne!(s, record_seed(1, "doc-1", 1));
        assert_ne!(s, record_seed(1, "doc-2", 0));
        assert_ne!(s, record_seed(2, "doc-1", 0));
    }
}
