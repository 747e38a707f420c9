//! Seed derivation and the pseudorandom streams shared by both protocol parties.
//!
//! Every random quantity in the crate comes from a `Xoshiro256**` generator
//! seeded through SplitMix64 (`Xoshiro256StarStar::seed_from_u64`). Bits are
//! drawn from successive 64-bit outputs, least significant bit first. Bounded
//! integers use rejection sampling on full 64-bit outputs, so a Fisher–Yates
//! shuffle is reproducible from the seed alone in any language.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::bits::BitString;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `z`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `index` from `master`:
/// `splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)`.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub struct Stream(Xoshiro256StarStar);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // largest multiple of `bound` representable, exclusive
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `len` uniform bits, consuming `ceil(len / 64)` outputs.
    pub fn bits(&mut self, len: usize) -> BitString {
        let words = (0..len.div_ceil(64)).map(|_| self.next_u64()).collect();
        BitString::from_words(words, len)
    }

    /// Fisher–Yates: for `i` from `len - 1` down to 1, swap `i` with `below(i + 1)`.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = self.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
