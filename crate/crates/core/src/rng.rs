//! Seeded, splittable pseudo-randomness.
//!
//! Everything random in this crate goes through SplitMix64 (Steele, Lea and
//! Flood 2014) so that masks can be reproduced bit-for-bit by a port:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! All arithmetic is wrapping on `u64`. Streams are split with
//! [`derive_seed`], and stateless lookups use [`hash2`].

use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential SplitMix64 generator; the state starts at the seed itself.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    inner: rand_xoshiro::SplitMix64,
    // mirrors the inner state, which is private; `split` needs it
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { inner: rand_xoshiro::SplitMix64::seed_from_u64(seed), state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        self.inner.next_u64()
    }

    /// Uniform value in `[0, bound)` by plain modulo reduction.
    ///
    /// The reduction is biased for bounds that are not powers of two; that is
    /// accepted in exchange for a port-friendly definition.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        self.next_u64() % bound
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// An independent generator for substream `label`.
    pub fn split(&self, label: u64) -> SplitMix64 {
        SplitMix64::new(derive_seed(self.state, label))
    }
}

/// Seed of substream `label` under `seed`.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Stateless hash of `(seed, index)`; equals the first output of
/// `SplitMix64::new(derive_seed(seed, index))`.
pub fn hash2(seed: u64, index: u64) -> u64 {
    mix64(derive_seed(seed, index).wrapping_add(GOLDEN))
}

/// Bijection on `bits`-bit integers keyed by `key`.
///
/// Built from xorshift and odd-multiplier rounds, each invertible modulo
/// `2^bits`. Used to pick exact-size subsets of a dyadic block without
/// materializing it.
pub fn permute_bits(x: u64, bits: u32, key: u64) -> u64 {
    if bits == 0 {
        return 0;
    }
    let mask = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let shift = (bits / 2).max(1);
    let mut v = x & mask;
    for round in 0..4u64 {
        let k = hash2(key, round);
        v = v.wrapping_add(k) & mask;
        v = v.wrapping_mul(k | 1) & mask;
        v ^= v >> shift;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 seeded with 0 (reference implementation).
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn split_streams_differ() {
        let g = SplitMix64::new(7);
        let mut a = g.split(0);
        let mut b = g.split(1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn hash2_matches_split_generator() {
        let mut g = SplitMix64::new(derive_seed(11, 5));
        assert_eq!(g.next_u64(), hash2(11, 5));
    }

    #[test]
    fn permute_is_bijective() {
        for bits in 0..10u32 {
            let size = 1u64 << bits;
            let mut seen = vec![false; size as usize];
            for x in 0..size {
                let y = permute_bits(x, bits, 42);
                assert!(y < size);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
            }
        }
    }
}
