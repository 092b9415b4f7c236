//! Seeded random streams. Every consumer keys its generator by
//! `(seed, stream)` so results never depend on evaluation order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circular complex Gaussian samples with unit variance per component.
pub fn complex_gaussian(n: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = stream_rng(seed, stream);
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

/// Unit-modulus samples with phase uniform on `[0, 2 pi)`.
pub fn unit_phase<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI))
        .collect()
}
