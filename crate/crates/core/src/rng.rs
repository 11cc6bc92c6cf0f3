//! Seeded, order-independent random streams.
//!
//! Every random draw in the workspace comes from a [`Stream`] opened from an
//! [`RngSeed`] `(root, stream)`. The generator is ChaCha8:
//!
//! * the 256-bit key is four consecutive SplitMix64 outputs seeded with
//!   `root`, written little-endian;
//! * the ChaCha stream id is `stream`, the block counter starts at zero.
//!
//! Uniform indices in `0..n` use Lemire's multiply-and-reject method on
//! 32-bit words (64-bit words when `n` does not fit in `u32`), so there is
//! no modulo bias. Uniform reals use the top 53 bits of a 64-bit word.
//!
//! Replicate `b` of a resampling loop always uses `seed.replicate(b)`, which
//! is `(root, b)` for a seed whose stream is 0. Workers can therefore draw
//! replicates in any order on any number of threads and still reproduce the
//! same values.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut s = a ^ b.rotate_left(32) ^ GOLDEN;
    splitmix64(&mut s) ^ splitmix64(&mut s).rotate_left(17)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub root: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(root: u64, stream: u64) -> Self {
        Self { root, stream }
    }

    /// Root key used for replicate streams derived from this seed.
    fn replicate_root(&self) -> u64 {
        if self.stream == 0 {
            self.root
        } else {
            mix(self.root, self.stream)
        }
    }

    /// Seed for replicate `b`: `(root, b)` when this seed's stream is 0.
    pub fn replicate(&self, b: u64) -> RngSeed {
        RngSeed::new(self.replicate_root(), b)
    }

    /// Independent seed for a named sub-computation (outer repetition,
    /// oracle pass, ...). Distinct labels give unrelated key material.
    pub fn child(&self, label: u64) -> RngSeed {
        RngSeed::new(mix(mix(self.root, self.stream), label.wrapping_add(1)), 0)
    }

    pub fn open(&self) -> Stream {
        Stream::new(*self)
    }
}

/// A ChaCha8 stream with the sampling helpers used throughout the crate.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: RngSeed) -> Self {
        let mut state = seed.root;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(seed.stream);
        Self { inner }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw from `0..n`. Panics when `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        if let Ok(range) = u32::try_from(n) {
            let threshold = range.wrapping_neg() % range;
            loop {
                let m = u64::from(self.next_u32()) * u64::from(range);
                if (m as u32) >= threshold {
                    return (m >> 32) as usize;
                }
            }
        } else {
            let range = n as u64;
            let threshold = range.wrapping_neg() % range;
            loop {
                let m = u128::from(self.next_u64()) * u128::from(range);
                if (m as u64) >= threshold {
                    return (m >> 64) as usize;
                }
            }
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.next_u32() >> 31 == 1
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Reference outputs of SplitMix64 seeded with 1234567.
        let mut s = 1234567u64;
        assert_eq!(splitmix64(&mut s), 6457827717110365317);
        assert_eq!(splitmix64(&mut s), 3203168211198807973);
        assert_eq!(splitmix64(&mut s), 9817491932198370423);
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = {
            let mut s = RngSeed::new(42, 7).open();
            (0..16).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = RngSeed::new(42, 7).open();
            (0..16).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
        let mut other = RngSeed::new(42, 8).open();
        assert_ne!(a[0], other.next_u64());
    }

    #[test]
    fn replicate_of_stream_zero_is_root_b() {
        let base = RngSeed::new(99, 0);
        assert_eq!(base.replicate(5), RngSeed::new(99, 5));
        assert_ne!(RngSeed::new(99, 3).replicate(5), RngSeed::new(99, 5));
    }

    #[test]
    fn children_are_distinct() {
        let base = RngSeed::new(1, 0);
        assert_ne!(base.child(0), base.child(1));
        assert_ne!(base.child(0), RngSeed::new(1, 1).child(0));
    }

    #[test]
    fn index_stays_in_range_and_covers_support() {
        let mut s = RngSeed::new(3, 0).open();
        let mut seen = [0usize; 7];
        for _ in 0..7000 {
            let i = s.index(7);
            seen[i] += 1;
        }
        for &c in &seen {
            assert!((850..1150).contains(&c), "{seen:?}");
        }
        assert_eq!(s.index(1), 0);
    }

    #[test]
    fn uniform_moments() {
        let mut s = RngSeed::new(11, 0).open();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.uniform()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005);
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn normal_moments() {
        let mut s = RngSeed::new(12, 0).open();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }
}
