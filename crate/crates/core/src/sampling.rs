//! Random test instances: Hurwitz drifts, Schur-stable maps, PSD diffusions.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::linalg;

pub fn uniform_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    half_width: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-half_width..half_width))
}

pub fn uniform_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, half_width: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-half_width..half_width))
}

/// `LLᵀ` with uniform `L`; positive semidefinite, generically definite.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let l = uniform_matrix(rng, n, n, 1.0);
    linalg::symmetrize(&(&l * l.transpose()))
}

/// Uniform matrix shifted so that its spectral abscissa lies in `[-1, -0.1]`.
pub fn random_hurwitz<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = uniform_matrix(rng, n, n, 1.0);
    let abscissa = linalg::max_real_part(&linalg::eigenvalues(&g));
    let target = -rng.random_range(0.1..1.0);
    g + DMatrix::identity(n, n) * (target - abscissa)
}

/// Uniform matrix rescaled to a spectral radius in `[0.05, 0.95]`.
///
/// Draws with spectral radius ≤ 0.2 are redrawn: rescaling a nearly nilpotent
/// matrix inflates its entries and makes it strongly non-normal.
pub fn random_schur_stable<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let g = uniform_matrix(rng, n, n, 1.0);
        let rho = linalg::spectral_radius(&linalg::eigenvalues(&g));
        if rho > 0.2 {
            return g * (rng.random_range(0.05..0.95) / rho);
        }
    }
}

/// Phase-space dimension `2N` with `N` uniform in `1..=max_modes`.
pub fn random_dim<R: Rng + ?Sized>(rng: &mut R, max_modes: usize) -> usize {
    2 * rng.random_range(1..=max_modes)
}
