#![allow(dead_code)]

use driftgauge::{DMatrix, DVector};
use proptest::prelude::*;

/// Square matrix with entries in `[-w, w]`.
pub fn matrix(n: usize, w: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-w..w, n * n).prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
}

pub fn vector(n: usize, w: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-w..w, n).prop_map(DVector::from_vec)
}

pub fn psd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(n, 1.0).prop_map(|l| {
        let m = &l * l.transpose();
        (&m + m.transpose()) * 0.5
    })
}

/// Phase-space dimension 2, 4 or 6.
pub fn dim() -> impl Strategy<Value = usize> {
    (1usize..=3).prop_map(|n| 2 * n)
}

pub fn hurwitz(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (matrix(n, 1.0), 0.1..1.0f64).prop_map(move |(g, margin)| {
        let abscissa = driftgauge::linalg::max_real_part(&driftgauge::linalg::eigenvalues(&g));
        g - DMatrix::identity(n, n) * (abscissa + margin)
    })
}

/// Uniform matrix rescaled to a spectral radius in `[0.05, 0.95]`. Draws
/// with ρ ≤ 0.2 are rejected so the rescaling stretches entries at most 5x.
pub fn schur_stable(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    rescaled_stable(n, 0.2)
}

/// Like [`schur_stable`] but keeps nearly nilpotent draws, whose rescaled
/// form can be far from normal.
pub fn any_schur_stable(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    rescaled_stable(n, 1e-3)
}

fn rescaled_stable(n: usize, min_rho: f64) -> impl Strategy<Value = DMatrix<f64>> {
    (matrix(n, 1.0), 0.05..0.95f64).prop_filter_map("degenerate draw", move |(g, radius)| {
        let rho = driftgauge::linalg::spectral_radius(&driftgauge::linalg::eigenvalues(&g));
        (rho > min_rho).then(|| g * (radius / rho))
    })
}

pub fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
