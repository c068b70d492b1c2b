//! Stability tests and the Lyapunov / Stein solvers.
//!
//! 2x2 problems go through explicit closed forms; anything larger is
//! vectorized into a dense Kronecker system and solved by LU.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, psd_tolerance, CompensatedSum};

/// Largest phase-space dimension accepted by the Kronecker paths.
pub const MAX_KRONECKER_DIM: usize = 20;

/// Term cap of [`stein_series`].
pub const MAX_SERIES_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    /// Discrete time: spectral radius below one.
    Discrete,
    /// Continuous time: every eigenvalue in the open left half-plane.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    pub hurwitz: bool,
    pub max_real_part: f64,
    pub spectral_radius: f64,
    /// `(1 - Δ, 1 - τ + Δ, 1 + τ + Δ)` with `τ = tr X`, `Δ = det X`, for 2x2 input.
    pub jury_triple: Option<[f64; 3]>,
    pub eigenvalues: Vec<Complex64>,
}

impl StabilityReport {
    /// Verdict for the requested mode.
    pub fn is_stable(&self) -> bool {
        match self.mode {
            StabilityMode::Continuous => self.hurwitz,
            StabilityMode::Discrete => self.spectral_radius < 1.0,
        }
    }

    /// Jury verdict: all three factors strictly positive.
    pub fn jury_stable(&self) -> Option<bool> {
        self.jury_triple.map(|t| t.iter().all(|&v| v > 0.0))
    }
}

pub fn jury_triple(x: &DMatrix<f64>) -> [f64; 3] {
    let tau = x[(0, 0)] + x[(1, 1)];
    let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    [1.0 - det, 1.0 - tau + det, 1.0 + tau + det]
}

pub fn stability(m: &DMatrix<f64>, mode: StabilityMode) -> Result<StabilityReport> {
    let n = linalg::require_square(m)?;
    let eigenvalues = linalg::eigenvalues(m);
    let max_real_part = linalg::max_real_part(&eigenvalues);
    Ok(StabilityReport {
        mode,
        hurwitz: max_real_part < 0.0,
        max_real_part,
        spectral_radius: linalg::spectral_radius(&eigenvalues),
        jury_triple: (n == 2 && mode == StabilityMode::Discrete).then(|| jury_triple(m)),
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeSource {
    Lyapunov,
    Stein,
    SteinSeries,
    JordanClosedForm,
    EpBranchFormula,
}

/// A gauge covariance together with the defect of the equation it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCovariance {
    pub s: DMatrix<f64>,
    pub source: GaugeSource,
    /// Max-abs entry of the equation defect.
    pub residual: f64,
    pub tolerance: f64,
}

impl GaugeCovariance {
    /// Checks the recorded residual against the solver tolerance.
    pub(crate) fn accept(
        s: DMatrix<f64>,
        source: GaugeSource,
        residual: f64,
        tolerance: f64,
    ) -> Result<Self> {
        if !(residual <= tolerance) {
            return Err(Error::Inaccurate {
                residual,
                tolerance,
            });
        }
        Ok(Self {
            s,
            source,
            residual,
            tolerance,
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.s)
    }
}

/// Acceptance bound for a Lyapunov residual, relative to the size of the
/// terms that cancel in `AS + SAᵀ + D`.
pub fn lyapunov_tolerance(a: &DMatrix<f64>, s: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let n = a.nrows() as f64;
    psd_tolerance(d.amax() + 2.0 * n * a.amax() * s.amax())
}

/// Acceptance bound for a Stein residual, relative to the size of the terms
/// that cancel in `S - XSXᵀ - Y`.
pub fn stein_tolerance(x: &DMatrix<f64>, s: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let nx = x.nrows() as f64 * x.amax();
    psd_tolerance(y.amax() + s.amax() * (1.0 + nx * nx))
}

pub fn lyapunov_residual(a: &DMatrix<f64>, s: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    (a * s + s * a.transpose() + d).amax()
}

pub fn stein_residual(x: &DMatrix<f64>, s: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (s - x * s * x.transpose() - y).amax()
}

fn check_pair(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<usize> {
    let n = linalg::require_square(a)?;
    if n == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    linalg::require_shape(d, n)?;
    Ok(n)
}

fn require_hurwitz(a: &DMatrix<f64>) -> Result<()> {
    let max_real_part = linalg::max_real_part(&linalg::eigenvalues(a));
    if max_real_part < 0.0 {
        Ok(())
    } else {
        Err(Error::NotHurwitz { max_real_part })
    }
}

fn require_schur_stable(x: &DMatrix<f64>) -> Result<()> {
    let spectral_radius = linalg::spectral_radius(&linalg::eigenvalues(x));
    if spectral_radius < 1.0 {
        Ok(())
    } else {
        Err(Error::Unstable { spectral_radius })
    }
}

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn unvec(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

fn tiny(x: f64, scale: f64) -> bool {
    x.abs() <= linalg::PIVOT_THRESHOLD * scale
}

/// Solves `AS + SAᵀ + D = 0` for Hurwitz `A`.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<GaugeCovariance> {
    let n = check_pair(a, d)?;
    if n == 2 {
        solve_lyapunov_2x2(a, d)
    } else {
        solve_lyapunov_kronecker(a, d)
    }
}

/// Closed-form 2x2 Lyapunov solution; falls back to the reduced 3x3 system
/// when a diagonal drift entry vanishes.
pub fn solve_lyapunov_2x2(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<GaugeCovariance> {
    if check_pair(a, d)? != 2 {
        return Err(Error::InvalidDimension("expected a 2x2 drift".into()));
    }
    require_hurwitz(a)?;
    let s = refine_lyapunov(a, d, lyapunov_2x2_raw)?;
    let residual = lyapunov_residual(a, &s, d);
    let tolerance = lyapunov_tolerance(a, &s, d);
    GaugeCovariance::accept(s, GaugeSource::Lyapunov, residual, tolerance)
}

fn lyapunov_2x2_raw(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let (d11, d12, d22) = (d[(0, 0)], 0.5 * (d[(0, 1)] + d[(1, 0)]), d[(1, 1)]);
    let scale = a.amax();
    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a21;

    let (s11, s12, s22) =
        if tiny(a11, scale) || tiny(a22, scale) || tiny(tr, scale) || tiny(det, scale * scale) {
            let m = DMatrix::from_row_slice(
                3,
                3,
                &[
                    2.0 * a11,
                    2.0 * a12,
                    0.0,
                    a21,
                    tr,
                    a12,
                    0.0,
                    2.0 * a21,
                    2.0 * a22,
                ],
            );
            let rhs = DVector::from_vec(vec![-d11, -d12, -d22]);
            let sol = linalg::lu_solve(m, &rhs).ok_or(Error::DegenerateSpectrum(
                "λi + λj = 0 in the reduced system",
            ))?;
            (sol[0], sol[1], sol[2])
        } else {
            let s12 =
                (a11 * a12 * d22 + a21 * a22 * d11 - 2.0 * a11 * a22 * d12) / (2.0 * tr * det);
            let s11 = -(d11 + 2.0 * a12 * s12) / (2.0 * a11);
            let s22 = -(d22 + 2.0 * a21 * s12) / (2.0 * a22);
            (s11, s12, s22)
        };
    Ok(DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22]))
}

/// Vectorized solve of `(I⊗A + A⊗I) vec S = -vec D`.
pub fn solve_lyapunov_kronecker(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<GaugeCovariance> {
    let n = check_pair(a, d)?;
    if n > MAX_KRONECKER_DIM {
        return Err(Error::TooLarge {
            size: n,
            max: MAX_KRONECKER_DIM,
        });
    }
    require_hurwitz(a)?;
    let s = refine_lyapunov(a, d, lyapunov_kronecker_raw)?;
    let residual = lyapunov_residual(a, &s, d);
    let tolerance = lyapunov_tolerance(a, &s, d);
    GaugeCovariance::accept(s, GaugeSource::Lyapunov, residual, tolerance)
}

fn lyapunov_kronecker_raw(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let k = linalg::kron(&id, a) + linalg::kron(a, &id);
    let sol = linalg::lu_solve(k, &-vec_of(d))
        .ok_or(Error::DegenerateSpectrum("λi + λj = 0 for some pair"))?;
    Ok(linalg::symmetrize(&unvec(&sol, n)))
}

/// One step of iterative refinement with a compensated residual: for
/// `R = AS + SAᵀ + D` the error `E = S - S*` solves `AE + EAᵀ - R = 0`.
fn refine_lyapunov(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    raw: fn(&DMatrix<f64>, &DMatrix<f64>) -> Result<DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    let s = raw(a, d)?;
    let r = linalg::symmetrize(&lyapunov_residual_compensated(a, &s, d));
    let e = raw(a, &-r)?;
    Ok(linalg::symmetrize(&(s - e)))
}

fn lyapunov_residual_compensated(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let mut acc = CompensatedSum::new(d[(i, j)]);
        for k in 0..n {
            acc.add_product(a[(i, k)], s[(k, j)]);
            acc.add_product(s[(i, k)], a[(j, k)]);
        }
        acc.value()
    })
}

/// Solves `S = XSXᵀ + Y` for Schur-stable `X`.
pub fn solve_stein(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<GaugeCovariance> {
    let n = check_pair(x, y)?;
    if n == 2 {
        solve_stein_2x2(x, y)
    } else {
        solve_stein_kronecker(x, y)
    }
}

/// Closed-form 2x2 Stein solution via the adjugate of the reduced 3x3 map.
///
/// The unknowns `(s11, s12, s22)` satisfy `M s = y` with
/// `det M = (1 - Δ)(1 - τ + Δ)(1 + τ + Δ)`.
pub fn solve_stein_2x2(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<GaugeCovariance> {
    if check_pair(x, y)? != 2 {
        return Err(Error::InvalidDimension("expected a 2x2 drift".into()));
    }
    require_schur_stable(x)?;
    let s = refine_stein(x, y, stein_2x2_raw)?;
    let residual = stein_residual(x, &s, y);
    let tolerance = stein_tolerance(x, &s, y);
    GaugeCovariance::accept(s, GaugeSource::Stein, residual, tolerance)
}

fn stein_2x2_raw(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (x1, x2, x3, x4) = (x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]);
    let m = [
        [1.0 - x1 * x1, -2.0 * x1 * x2, -x2 * x2],
        [-x1 * x3, 1.0 - (x1 * x4 + x2 * x3), -x2 * x4],
        [-x3 * x3, -2.0 * x3 * x4, 1.0 - x4 * x4],
    ];
    let [j1, j2, j3] = jury_triple(x);
    let den = j1 * j2 * j3;
    if !(den > 0.0) {
        return Err(Error::Unstable {
            spectral_radius: linalg::spectral_radius(&linalg::eigenvalues(x)),
        });
    }
    // adjugate = transpose of the cofactor matrix
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let rhs = [y[(0, 0)], 0.5 * (y[(0, 1)] + y[(1, 0)]), y[(1, 1)]];
    let sol: Vec<f64> = adj
        .iter()
        .map(|row| (row[0] * rhs[0] + row[1] * rhs[1] + row[2] * rhs[2]) / den)
        .collect();
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[sol[0], sol[1], sol[1], sol[2]],
    ))
}

/// Vectorized solve of `(I - X⊗X) vec S = vec Y`.
pub fn solve_stein_kronecker(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<GaugeCovariance> {
    let n = check_pair(x, y)?;
    if n > MAX_KRONECKER_DIM {
        return Err(Error::TooLarge {
            size: n,
            max: MAX_KRONECKER_DIM,
        });
    }
    require_schur_stable(x)?;
    let s = refine_stein(x, y, stein_kronecker_raw)?;
    let residual = stein_residual(x, &s, y);
    let tolerance = stein_tolerance(x, &s, y);
    GaugeCovariance::accept(s, GaugeSource::Stein, residual, tolerance)
}

fn stein_kronecker_raw(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let k = DMatrix::<f64>::identity(n * n, n * n) - linalg::kron(x, x);
    let sol = linalg::lu_solve(k, &vec_of(y))
        .ok_or(Error::DegenerateSpectrum("λi λj = 1 for some pair"))?;
    Ok(linalg::symmetrize(&unvec(&sol, n)))
}

/// One step of iterative refinement with a compensated residual: for
/// `R = S - XSXᵀ - Y` the error `E = S - S*` solves `E - XEXᵀ = R`.
fn refine_stein(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    raw: fn(&DMatrix<f64>, &DMatrix<f64>) -> Result<DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    let s = raw(x, y)?;
    let r = linalg::symmetrize(&stein_residual_compensated(x, &s, y));
    let e = raw(x, &r)?;
    Ok(linalg::symmetrize(&(s - e)))
}

fn stein_residual_compensated(
    x: &DMatrix<f64>,
    s: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = x.nrows();
    // SXᵀ as a pair of words
    let mut hi = DMatrix::zeros(n, n);
    let mut lo = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let mut acc = CompensatedSum::new(0.0);
            for l in 0..n {
                acc.add_product(s[(k, l)], x[(j, l)]);
            }
            (hi[(k, j)], lo[(k, j)]) = acc.split();
        }
    }
    DMatrix::from_fn(n, n, |i, j| {
        let mut acc = CompensatedSum::new(s[(i, j)]);
        acc.add(-y[(i, j)]);
        for k in 0..n {
            acc.add_product(-x[(i, k)], hi[(k, j)]);
            acc.add_product(-x[(i, k)], lo[(k, j)]);
        }
        acc.value()
    })
}

/// Partial sums of `Σ XⁿY(Xᵀ)ⁿ` until the increment falls below `tol`.
pub fn stein_series(x: &DMatrix<f64>, y: &DMatrix<f64>, tol: f64) -> Result<GaugeCovariance> {
    check_pair(x, y)?;
    require_schur_stable(x)?;
    let xt = x.transpose();
    let mut term = y.clone();
    let mut s = y.clone();
    for _ in 0..MAX_SERIES_TERMS {
        term = x * &term * &xt;
        s += &term;
        if term.amax() < tol {
            let s = linalg::symmetrize(&s);
            let residual = stein_residual(x, &s, y);
            return Ok(GaugeCovariance {
                s,
                source: GaugeSource::SteinSeries,
                residual,
                tolerance: tol,
            });
        }
    }
    Err(Error::NoConvergence {
        terms: MAX_SERIES_TERMS,
    })
}

/// A 2x2 drift `X = α(I + tN)` with nilpotent `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanDrift2x2 {
    alpha: f64,
    n: DMatrix<f64>,
    t: f64,
}

impl JordanDrift2x2 {
    pub fn new(alpha: f64, n: DMatrix<f64>, t: f64) -> Result<Self> {
        linalg::require_shape(&n, 2)?;
        let norm = n.amax();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter(
                "nilpotent part must be nonzero".into(),
            ));
        }
        if (&n * &n).amax() > 1e-12 * norm * norm {
            return Err(Error::InvalidParameter("N² must vanish".into()));
        }
        if !alpha.is_finite() || !t.is_finite() {
            return Err(Error::InvalidParameter("α and t must be finite".into()));
        }
        Ok(Self { alpha, n, t })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nilpotent(&self) -> &DMatrix<f64> {
        &self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> DMatrix<f64> {
        (DMatrix::identity(2, 2) + &self.n * self.t) * self.alpha
    }
}

/// Three-term Stein solution for a Jordan drift, `ρ = α²`:
/// `S = Y/(1-ρ) + ρt(NY + YNᵀ)/(1-ρ)² + ρ(1+ρ)t² NYNᵀ/(1-ρ)³`.
pub fn stein_jordan_closed_form(j: &JordanDrift2x2, y: &DMatrix<f64>) -> Result<GaugeCovariance> {
    linalg::require_shape(y, 2)?;
    if j.alpha.abs() >= 1.0 {
        return Err(Error::Unstable {
            spectral_radius: j.alpha.abs(),
        });
    }
    let rho = j.alpha * j.alpha;
    let q = 1.0 - rho;
    let n = &j.n;
    let ny = n * y;
    let cross = &ny + ny.transpose();
    let nynt = &ny * n.transpose();
    let s = y / q
        + cross * (rho * j.t / (q * q))
        + nynt * (rho * (1.0 + rho) * j.t * j.t / (q * q * q));
    let s = linalg::symmetrize(&s);
    let x = j.x();
    let residual = stein_residual(&x, &s, y);
    let tolerance = stein_tolerance(&x, &s, y);
    GaugeCovariance::accept(s, GaugeSource::JordanClosedForm, residual, tolerance)
}

/// `e^{tB}` for a real 2x2 `B` via the scalar shift `B = (trB/2)I + B₀`.
///
/// # Panics
/// Panics if `b` is not 2x2.
pub fn expm2(b: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    assert!(b.nrows() == 2 && b.ncols() == 2, "expm2 needs a 2x2 matrix");
    let shift = 0.5 * (b[(0, 0)] + b[(1, 1)]);
    let b0 = b - DMatrix::identity(2, 2) * shift;
    // B₀² = -det(B₀) I
    let det0 = b0[(0, 0)] * b0[(1, 1)] - b0[(0, 1)] * b0[(1, 0)];
    let q = -det0 * t * t;
    let norm2 = b0.norm_squared();
    let (c, sc) = if det0.abs() < 1e-12 * norm2 || norm2 == 0.0 {
        (1.0 + q / 2.0 + q * q / 24.0, 1.0 + q / 6.0 + q * q / 120.0)
    } else if q > 0.0 {
        let x = q.sqrt();
        let sc = if x < 1e-4 {
            1.0 + q / 6.0 + q * q / 120.0
        } else {
            x.sinh() / x
        };
        (x.cosh(), sc)
    } else {
        let x = (-q).sqrt();
        let sc = if x < 1e-4 {
            1.0 + q / 6.0 + q * q / 120.0
        } else {
            x.sin() / x
        };
        (x.cos(), sc)
    };
    (DMatrix::identity(2, 2) * c + b0 * (sc * t)) * (shift * t).exp()
}

/// Matrix exponential: [`expm2`] for 2x2, Padé scaling-and-squaring otherwise.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 2 && m.ncols() == 2 {
        expm2(m, 1.0)
    } else {
        m.exp()
    }
}
