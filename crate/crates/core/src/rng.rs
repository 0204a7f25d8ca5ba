//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a stream keyed by
//! `(master_seed, label, index)`. The key is mixed into a 64-bit seed with
//! SplitMix64 finalizers and expanded into a xoshiro256++ state, so a stream
//! never depends on which worker thread consumes it or in which order.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a, then finalized.
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(h)
}

/// Derive the seed of stream `index` under `label` for a master seed.
pub fn stream_seed(master_seed: u64, label: &str, index: u64) -> u64 {
    let a = mix64(master_seed.wrapping_add(GOLDEN));
    let b = mix64(a ^ label_hash(label));
    mix64(b ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// A random stream producing uniform variates.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: Xoshiro256PlusPlus,
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn derive(master_seed: u64, label: &str, index: u64) -> Self {
        Self::from_seed(stream_seed(master_seed, label, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1): 53 random bits, offset by half a ulp.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` by Lemire's multiply-shift with rejection.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}
