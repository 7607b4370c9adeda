//! Deterministic random streams keyed on `(master_seed, cell, replicate)`.
//!
//! Every stream is a ChaCha8 keystream. The master seed selects the key and the
//! pair `(cell, replicate)` is packed into the 64-bit stream id, so two
//! different pairs never share a keystream and no stream depends on how many
//! draws any other stream has consumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream 0 of the key derived from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        Self::derive(seed, 0, 0)
    }

    pub fn derive(master_seed: u64, cell: u32, replicate: u32) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id(cell, replicate));
        Self { inner }
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// One uniform draw compared against `p`; `p = 1` is always true and
    /// `p = 0` always false.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Panics if either shape parameter is not strictly positive.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        Beta::new(alpha, beta)
            .expect("beta shape parameters must be positive")
            .sample(&mut self.inner)
    }
}

#[inline]
fn stream_id(cell: u32, replicate: u32) -> u64 {
    ((cell as u64) << 32) | replicate as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(mut s: RngStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| s.uniform()).collect()
    }

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(draws(RngStream::from_seed(7), 64), draws(RngStream::from_seed(7), 64));
    }

    #[test]
    fn distinct_replicates_distinct_sequences() {
        let a = draws(RngStream::derive(7, 0, 0), 8);
        let b = draws(RngStream::derive(7, 0, 1), 8);
        let c = draws(RngStream::derive(7, 1, 0), 8);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn stream_id_is_injective_on_pairs() {
        assert_ne!(stream_id(1, 0), stream_id(0, 1));
        assert_ne!(stream_id(u32::MAX, 0), stream_id(0, u32::MAX));
    }

    #[test]
    fn frozen_first_draws() {
        // Pins the derivation; a dependency bump that changes streams breaks
        // reproducibility of published outputs and must show up here.
        let mut s = RngStream::derive(2024, 3, 5);
        assert_eq!(s.uniform(), 0.8456291266372457);
        assert_eq!(s.uniform(), 0.598334839255177);
        assert_eq!(s.uniform(), 0.2672549477133339);
    }

    #[test]
    fn bernoulli_extremes() {
        let mut s = RngStream::from_seed(1);
        for _ in 0..1000 {
            assert!(s.bernoulli(1.0));
            assert!(!s.bernoulli(0.0));
        }
    }
}
