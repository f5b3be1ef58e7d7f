//! Seed derivation.
//!
//! `derive_seed(master, index)` is the `index`-th output of a SplitMix64
//! generator whose state starts at `mix64(master)`:
//!
//! ```text
//! mix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!            z ^ (z >> 31)
//! derive_seed(m, i) = mix64(mix64(m) + (i + 1) * 0x9E3779B97F4A7C15)   (wrapping)
//! ```
//!
//! For a fixed master the map `i -> seed` is a bijection on `u64`, so
//! distinct indices never collide. `derive_seed(0, 0)` equals the first
//! output of SplitMix64 seeded with 0, `0xE220A8397B1DCDAF`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (a bijection with full avalanche).
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub const fn derive_seed(master_seed: u64, sample_index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(sample_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// The generator used for every random draw in synthesis.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Reference SplitMix64 stream, written out independently.
    struct SplitMix64(u64);

    impl SplitMix64 {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        }
    }

    #[test]
    fn published_test_vector() {
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn equals_splitmix_stream_from_mixed_master() {
        for master in [0u64, 1, 42, u64::MAX] {
            let mut reference = SplitMix64(mix64(master));
            for i in 0..64 {
                assert_eq!(derive_seed(master, i), reference.next());
            }
        }
    }

    #[test]
    fn pure() {
        assert_eq!(derive_seed(99, 7), derive_seed(99, 7));
    }

    #[test]
    fn no_collisions_over_a_million_indices() {
        let mut seen = HashSet::with_capacity(1 << 20);
        for i in 0..1_000_000u64 {
            assert!(seen.insert(derive_seed(0xDEAD_BEEF, i)), "collision at {i}");
        }
    }
}
