//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot threshold below which an LU factorization is treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Scale-aware slack used by every positive-semidefiniteness test.
pub fn psd_tolerance(scale: f64) -> f64 {
    1e-10 * (1.0 + scale)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn is_square(m: &DMatrix<f64>) -> bool {
    m.nrows() == m.ncols()
}

pub fn require_square(m: &DMatrix<f64>) -> Result<usize> {
    if is_square(m) {
        Ok(m.nrows())
    } else {
        Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn require_shape(m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    Ok(())
}

pub fn require_len(v: &DVector<f64>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// Largest |m_ij - m_ji|.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Least eigenvalue of a Hermitian matrix, computed by a Hermitian solver.
pub fn hermitian_min_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(h.clone());
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = if m.nrows() == 2 {
        // closed form keeps the 2x2 sweeps exact in symmetric cases
        let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        vec![mean - rad, mean + rad]
    } else {
        SymmetricEigen::new(symmetrize(m))
            .eigenvalues
            .iter()
            .cloned()
            .collect()
    };
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn is_upper_triangular(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == 0.0))
}

fn is_lower_triangular(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (i + 1..m.ncols()).all(|j| m[(i, j)] == 0.0))
}

/// Eigenvalues of a 2x2 real matrix from the characteristic polynomial.
pub fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let h = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Complex64::new(h + s, 0.0), Complex64::new(h - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(h, s), Complex64::new(h, -s)]
    }
}

/// Eigenvalues of a real square matrix.
///
/// Triangular input returns its diagonal verbatim; 2x2 input uses the
/// characteristic polynomial; everything else goes through a real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if is_upper_triangular(m) || is_lower_triangular(m) {
        return (0..n).map(|i| Complex64::new(m[(i, i)], 0.0)).collect();
    }
    if n == 2 {
        return eigenvalues_2x2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec();
    }
    m.complex_eigenvalues().iter().cloned().collect()
}

/// Eigenvalues of a complex square matrix through a complex Schur form.
pub fn complex_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let schur = Schur::new(m.clone());
    match schur.eigenvalues() {
        Some(v) => v.iter().cloned().collect(),
        None => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    }
}

pub fn spectral_radius(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_real_part(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Running sum that carries the rounding error of every addition and product
/// (Ogita, Rump and Oishi's Sum2 and Dot2), so the result is about as
/// accurate as if it had been computed in twice the working precision.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn new(start: f64) -> Self {
        Self {
            sum: start,
            err: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let s = self.sum + x;
        let bp = s - self.sum;
        self.err += (self.sum - (s - bp)) + (x - bp);
        self.sum = s;
    }

    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.err += a.mul_add(b, -p);
        self.add(p);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.err
    }

    /// Leading and trailing parts of the sum, `hi + lo` carrying both words.
    pub fn split(&self) -> (f64, f64) {
        let hi = self.sum + self.err;
        (hi, self.err - (hi - self.sum))
    }
}

/// Solves `m x = rhs` by LU, rejecting pivots below the relative threshold.
pub fn lu_solve(m: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = m.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let big = diag.iter().cloned().fold(0.0, f64::max);
    let small = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if big == 0.0 || small < PIVOT_THRESHOLD * big {
        return None;
    }
    lu.solve(rhs)
}

/// Singular values of a square real matrix, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank of a complex matrix: singular values above `threshold`.
pub fn complex_rank(m: &DMatrix<Complex64>, threshold: f64) -> usize {
    m.singular_values()
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

/// Pairs every element of `a` with a distinct element of `b` greedily by
/// distance and returns the largest matched distance.
///
/// Returns `None` when the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (dist, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(dist);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    Some(worst)
}

/// Sorts complex numbers by real part, then imaginary part.
pub fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}
