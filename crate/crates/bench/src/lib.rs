//! Seeded problem instances shared by the benchmarks.

use driftgauge::sampling::{random_hurwitz, random_psd, random_schur_stable};
use driftgauge::{DMatrix, DVector, GaussianGenerator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A Hurwitz drift and a PSD diffusion of dimension `n`.
pub fn lyapunov_pair(n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_hurwitz(&mut rng, n), random_psd(&mut rng, n))
}

/// A Schur-stable map and a PSD noise matrix of dimension `n`.
pub fn stein_pair(n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_schur_stable(&mut rng, n), random_psd(&mut rng, n))
}

pub fn generator(n: usize, seed: u64) -> GaussianGenerator {
    let (a, d) = lyapunov_pair(n, seed);
    GaussianGenerator::new(a, d, DVector::zeros(n)).expect("valid generator")
}
