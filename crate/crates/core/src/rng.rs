//! Seeded Gaussian sampling.
//!
//! A ChaCha stream plus a hand-rolled Box-Muller transform keeps the sampled
//! values identical across platforms and independent of any distribution
//! crate's internals; determinism per seed is part of the public contract of
//! everything randomized in this crate.

// Under no_std, f64 math comes from this trait; std test graphs shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

pub(crate) struct GaussianSource {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform draw in the half-open interval (0, 1], safe under `ln`.
    pub(crate) fn unit_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller.
    pub(crate) fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u = self.unit_open();
        let v = self.unit_open();
        let r = (-2.0 * u.ln()).sqrt();
        let angle = 2.0 * core::f64::consts::PI * v;
        self.spare = Some(r * angle.sin());
        r * angle.cos()
    }
}
