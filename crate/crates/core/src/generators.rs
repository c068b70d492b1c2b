//! Continuous-time Gaussian generators `(A, D, u)` and their semigroups.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, psd_tolerance};
use crate::matrix_equations::{expm, solve_lyapunov};
use crate::phase_space::{
    form_for_dim, reorder_matrix, reorder_vector, CpMethod, CpReport, GaussianChannel, MomentState,
    Ordering,
};

/// Drift `A`, diffusion `D` and drive `u` of the moment equations
/// `ḋ = Ad + u`, `V̇ = AV + VAᵀ + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGenerator {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub u: DVector<f64>,
    pub ordering: Ordering,
    pub physical: bool,
}

impl GaussianGenerator {
    /// Unflagged generator in grouped ordering.
    pub fn new(a: DMatrix<f64>, d: DMatrix<f64>, u: DVector<f64>) -> Result<Self> {
        Self::with_ordering(a, d, u, Ordering::Grouped)
    }

    pub fn with_ordering(
        a: DMatrix<f64>,
        d: DMatrix<f64>,
        u: DVector<f64>,
        ordering: Ordering,
    ) -> Result<Self> {
        let dim = linalg::require_square(&a)?;
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "phase-space dimension {dim} is not 2N"
            )));
        }
        linalg::require_shape(&d, dim)?;
        linalg::require_len(&u, dim)?;
        if linalg::asymmetry(&d) > psd_tolerance(d.amax()) {
            return Err(Error::InvalidParameter("D must be symmetric".into()));
        }
        Ok(Self {
            a,
            d,
            u,
            ordering,
            physical: false,
        })
    }

    /// Builds a generator and flags it physical, rejecting parameters that
    /// violate the generator CP condition.
    pub fn physical(a: DMatrix<f64>, d: DMatrix<f64>, u: DVector<f64>) -> Result<Self> {
        let mut g = Self::new(a, d, u)?;
        let report = cp_check_generator(&g);
        if !report.passes {
            return Err(Error::NotCompletelyPositive {
                margin: report.margin,
            });
        }
        g.physical = true;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn to_ordering(&self, to: Ordering) -> Result<Self> {
        Ok(Self {
            a: reorder_matrix(&self.a, self.ordering, to)?,
            d: reorder_matrix(&self.d, self.ordering, to)?,
            u: reorder_vector(&self.u, self.ordering, to)?,
            ordering: to,
            physical: self.physical,
        })
    }
}

/// Quadratic Hamiltonian `H`, linear drive `f` and jump operators given by
/// their coefficient rows `ℓ_j`, so that `L_j = ℓ_jᵀ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladData {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub jump_rows: Vec<DVector<Complex64>>,
    /// Overall multiplier on `C†C`.
    pub rate: f64,
    pub ordering: Ordering,
}

impl LindbladData {
    /// `C†C = Σ_j conj(ℓ_j) ℓ_jᵀ`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let n = self.h.nrows();
        let mut g = DMatrix::<Complex64>::zeros(n, n);
        for l in &self.jump_rows {
            g += l.map(|z| z.conj()) * l.transpose();
        }
        g
    }
}

/// `A = Σ(H + κ Im C†C)`, `D = κ Σ Re(C†C) Σᵀ`, `u = Σf`.
pub fn from_lindblad(data: &LindbladData) -> Result<GaussianGenerator> {
    let n = linalg::require_square(&data.h)?;
    linalg::require_len(&data.f, n)?;
    for l in &data.jump_rows {
        if l.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.len(),
            });
        }
    }
    if linalg::asymmetry(&data.h) > psd_tolerance(data.h.amax()) {
        return Err(Error::InvalidParameter("H must be symmetric".into()));
    }
    if !(data.rate >= 0.0) {
        return Err(Error::InvalidParameter("rate must be non-negative".into()));
    }
    let sigma = form_for_dim(n, data.ordering)?;
    let g = data.gram();
    let re = g.map(|z| z.re);
    let im = g.map(|z| z.im);
    let a = &sigma * (&data.h + im * data.rate);
    let d = linalg::symmetrize(&(&sigma * re * sigma.transpose() * data.rate));
    let u = &sigma * &data.f;
    Ok(GaussianGenerator {
        a,
        d,
        u,
        ordering: data.ordering,
        physical: true,
    })
}

/// System Hamiltonian, drive, and a linear coupling `C` to a white-noise
/// bath with covariance `σ_in` and symplectic form `Σ_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteNoiseData {
    pub h_s: DMatrix<f64>,
    pub u: DVector<f64>,
    pub c: DMatrix<f64>,
    pub sigma_in: DMatrix<f64>,
    pub sigma_in_form: DMatrix<f64>,
    pub ordering: Ordering,
}

/// Least eigenvalue of `σ_in + (i/2)Σ_in`.
pub fn bath_margin(data: &WhiteNoiseData) -> f64 {
    let m = data.sigma_in.nrows();
    let h = DMatrix::from_fn(m, m, |i, j| {
        Complex64::new(data.sigma_in[(i, j)], 0.5 * data.sigma_in_form[(i, j)])
    });
    linalg::hermitian_min_eigenvalue(&h)
}

/// `A = ΣH_S + ½ΣCΣ_inCᵀ`, `D = ΣCσ_inCᵀΣᵀ`; rejects unphysical baths.
pub fn from_white_noise(data: &WhiteNoiseData) -> Result<GaussianGenerator> {
    check_white_noise(data)?;
    let margin = bath_margin(data);
    if margin < -psd_tolerance(data.sigma_in.amax()) {
        return Err(Error::NotCompletelyPositive { margin });
    }
    from_white_noise_unchecked(data)
}

/// As [`from_white_noise`] without the bath uncertainty check, for
/// deliberately unphysical experiments.
pub fn from_white_noise_unchecked(data: &WhiteNoiseData) -> Result<GaussianGenerator> {
    let n = check_white_noise(data)?;
    let sigma = form_for_dim(n, data.ordering)?;
    let sc = &sigma * &data.c;
    let a = &sigma * &data.h_s + &sc * &data.sigma_in_form * data.c.transpose() * 0.5;
    let d = linalg::symmetrize(&(&sc * &data.sigma_in * sc.transpose()));
    let mut g = GaussianGenerator {
        a,
        d,
        u: data.u.clone(),
        ordering: data.ordering,
        physical: false,
    };
    g.physical = cp_check_generator(&g).passes;
    Ok(g)
}

fn check_white_noise(data: &WhiteNoiseData) -> Result<usize> {
    let n = linalg::require_square(&data.h_s)?;
    linalg::require_len(&data.u, n)?;
    if data.c.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: data.c.nrows(),
        });
    }
    let m = data.c.ncols();
    linalg::require_shape(&data.sigma_in, m)?;
    linalg::require_shape(&data.sigma_in_form, m)?;
    Ok(n)
}

/// Least eigenvalue of the Hermitian matrix `D + (i/2)(AΣ + ΣAᵀ)`.
pub fn cp_check_generator(g: &GaussianGenerator) -> CpReport {
    let sigma = match form_for_dim(g.dim(), g.ordering) {
        Ok(s) => s,
        Err(_) => {
            return CpReport {
                passes: false,
                margin: f64::NAN,
                method: CpMethod::HermitianEig,
                tolerance: 0.0,
            }
        }
    };
    let k = &g.a * &sigma + &sigma * g.a.transpose();
    let n = g.dim();
    let h = DMatrix::from_fn(n, n, |i, j| Complex64::new(g.d[(i, j)], 0.5 * k[(i, j)]));
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tolerance = psd_tolerance(scale);
    let margin = linalg::hermitian_min_eigenvalue(&h);
    CpReport {
        passes: margin >= -tolerance,
        margin,
        method: CpMethod::HermitianEig,
        tolerance,
    }
}

/// Numerical knobs of [`semigroup_channel_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupOptions {
    /// Upper bound on `‖A‖·h` for the substeps of the direct integrals.
    pub max_step_norm: f64,
}

impl Default for SemigroupOptions {
    fn default() -> Self {
        Self { max_step_norm: 0.5 }
    }
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn substeps(a: &DMatrix<f64>, t: f64, max_step_norm: f64) -> usize {
    ((inf_norm(a) * t / max_step_norm).ceil() as usize).max(1)
}

/// `∫₀ᵗ e^{As} D e^{Aᵀs} ds` without reference to any Lyapunov solution.
///
/// Each substep uses the block exponential of `[[-A, D], [0, Aᵀ]]`; the steps
/// are chained with `Y(s + h) = Y(h) + e^{Ah} Y(s) e^{Aᵀh}`.
pub fn diffusion_integral(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    t: f64,
    max_step_norm: f64,
) -> DMatrix<f64> {
    let n = a.nrows();
    if t == 0.0 {
        return DMatrix::zeros(n, n);
    }
    let m = substeps(a, t, max_step_norm);
    let h = t / m as f64;
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-a * h));
    block.view_mut((0, n), (n, n)).copy_from(&(d * h));
    block
        .view_mut((n, n), (n, n))
        .copy_from(&(a.transpose() * h));
    let f = block.exp();
    let e = f.view((n, n), (n, n)).transpose();
    let y_h = &e * f.view((0, n), (n, n));
    let et = e.transpose();
    let mut y = y_h.clone();
    for _ in 1..m {
        y = &y_h + &e * &y * &et;
    }
    linalg::symmetrize(&y)
}

/// `∫₀ᵗ e^{As} u ds` from the augmented exponential of `[[A, u], [0, 0]]`.
fn drive_integral(a: &DMatrix<f64>, u: &DVector<f64>, t: f64, max_step_norm: f64) -> DVector<f64> {
    let n = a.nrows();
    if t == 0.0 {
        return DVector::zeros(n);
    }
    let m = substeps(a, t, max_step_norm);
    let h = t / m as f64;
    let mut block = DMatrix::zeros(n + 1, n + 1);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    block.view_mut((0, n), (n, 1)).copy_from(&(u * h));
    let f = block.exp();
    let e = f.view((0, 0), (n, n)).into_owned();
    let g_h: DVector<f64> = f.view((0, n), (n, 1)).column(0).into_owned();
    let mut g = g_h.clone();
    for _ in 1..m {
        g = &g_h + &e * &g;
    }
    g
}

/// The finite-time channel `Ψ_t` generated by `g`.
pub fn semigroup_channel(g: &GaussianGenerator, t: f64) -> Result<GaussianChannel> {
    semigroup_channel_with(g, t, SemigroupOptions::default())
}

/// `X_t = e^{At}`; `δ_t = A⁻¹(X_t - I)u` when `A` is invertible; `Y_t = S - X_t S X_tᵀ`
/// for Hurwitz `A`, otherwise the direct integral.
pub fn semigroup_channel_with(
    g: &GaussianGenerator,
    t: f64,
    opts: SemigroupOptions,
) -> Result<GaussianChannel> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    if !(opts.max_step_norm > 0.0) {
        return Err(Error::InvalidParameter(
            "max_step_norm must be positive".into(),
        ));
    }
    let n = g.dim();
    if t == 0.0 {
        let mut id = GaussianChannel::identity(n / 2)?;
        id.ordering = g.ordering;
        return Ok(id);
    }
    let x = expm(&(&g.a * t));
    let id = DMatrix::<f64>::identity(n, n);
    let delta = if g.u.amax() == 0.0 {
        DVector::zeros(n)
    } else {
        match linalg::lu_solve(g.a.clone(), &((&x - &id) * &g.u)) {
            Some(v) => v,
            None => drive_integral(&g.a, &g.u, t, opts.max_step_norm),
        }
    };
    let y = match solve_lyapunov(&g.a, &g.d) {
        Ok(s) => linalg::symmetrize(&(&s.s - &x * &s.s * x.transpose())),
        Err(_) => diffusion_integral(&g.a, &g.d, t, opts.max_step_norm),
    };
    Ok(GaussianChannel {
        x,
        y,
        delta,
        ordering: g.ordering,
        physical: g.physical,
    })
}

/// Classical fourth-order Runge-Kutta integration of the moment equations.
pub fn propagate_moments(
    g: &GaussianGenerator,
    s0: &MomentState,
    t: f64,
    steps: usize,
) -> Result<MomentState> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if s0.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: s0.dim(),
        });
    }
    let h = t / steps as f64;
    let at = g.a.transpose();
    let fd = |d: &DVector<f64>| &g.a * d + &g.u;
    let fv = |v: &DMatrix<f64>| &g.a * v + v * &at + &g.d;
    let mut d = s0.d.clone();
    let mut v = s0.v.clone();
    for _ in 0..steps {
        let k1 = fd(&d);
        let k2 = fd(&(&d + &k1 * (h / 2.0)));
        let k3 = fd(&(&d + &k2 * (h / 2.0)));
        let k4 = fd(&(&d + &k3 * h));
        d += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        let m1 = fv(&v);
        let m2 = fv(&(&v + &m1 * (h / 2.0)));
        let m3 = fv(&(&v + &m2 * (h / 2.0)));
        let m4 = fv(&(&v + &m3 * h));
        v += (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);
    }
    Ok(MomentState {
        d,
        v: linalg::symmetrize(&v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{apply_channel, compose, symplectic_form};
    use approx::assert_relative_eq;

    fn dm(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, v)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn annihilation(weight: f64) -> DVector<Complex64> {
        let s = (weight / 2.0).sqrt();
        DVector::from_vec(vec![c(s, 0.0), c(0.0, s)])
    }

    fn creation(weight: f64) -> DVector<Complex64> {
        let s = (weight / 2.0).sqrt();
        DVector::from_vec(vec![c(s, 0.0), c(0.0, -s)])
    }

    fn thermal(kappa: f64, nbar: f64) -> GaussianGenerator {
        from_lindblad(&LindbladData {
            h: DMatrix::zeros(2, 2),
            f: DVector::zeros(2),
            jump_rows: vec![annihilation(nbar + 1.0), creation(nbar)],
            rate: kappa,
            ordering: Ordering::Grouped,
        })
        .unwrap()
    }

    #[test]
    fn lindblad_examples() {
        let g = from_lindblad(&LindbladData {
            h: DMatrix::zeros(2, 2),
            f: DVector::zeros(2),
            jump_rows: vec![annihilation(1.0)],
            rate: 1.0,
            ordering: Ordering::Grouped,
        })
        .unwrap();
        assert_relative_eq!(g.a, DMatrix::identity(2, 2) * -0.5, epsilon = 1e-15);
        assert_relative_eq!(g.d, DMatrix::identity(2, 2) * 0.5, epsilon = 1e-15);

        let w = 1.7;
        let rot = from_lindblad(&LindbladData {
            h: DMatrix::identity(2, 2) * w,
            f: DVector::zeros(2),
            jump_rows: vec![],
            rate: 1.0,
            ordering: Ordering::Grouped,
        })
        .unwrap();
        assert_eq!(rot.a, dm(&[0.0, w, -w, 0.0]));
        assert_eq!(rot.d, DMatrix::zeros(2, 2));

        let drive = from_lindblad(&LindbladData {
            h: DMatrix::zeros(2, 2),
            f: DVector::from_vec(vec![2.0, 3.0]),
            jump_rows: vec![],
            rate: 1.0,
            ordering: Ordering::Grouped,
        })
        .unwrap();
        assert_eq!(drive.u.as_slice(), &[3.0, -2.0]);
    }

    #[test]
    fn white_noise_thermal_matches_lindblad() {
        let (kappa, nbar): (f64, f64) = (0.8, 1.5);
        let sigma = symplectic_form(1, Ordering::Grouped).unwrap().into_matrix();
        let data = WhiteNoiseData {
            h_s: DMatrix::zeros(2, 2),
            u: DVector::zeros(2),
            c: DMatrix::identity(2, 2) * kappa.sqrt(),
            sigma_in: DMatrix::identity(2, 2) * ((2.0 * nbar + 1.0) / 2.0),
            sigma_in_form: sigma,
            ordering: Ordering::Grouped,
        };
        let g = from_white_noise(&data).unwrap();
        assert_relative_eq!(
            g.a,
            DMatrix::identity(2, 2) * (-kappa / 2.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            g.d,
            DMatrix::identity(2, 2) * (kappa * (2.0 * nbar + 1.0) / 2.0),
            epsilon = 1e-15
        );
        let l = thermal(kappa, nbar);
        assert_relative_eq!(g.a, l.a, epsilon = 1e-15);
        assert_relative_eq!(g.d, l.d, epsilon = 1e-15);

        let mut bad = data.clone();
        bad.sigma_in = DMatrix::identity(2, 2) * 0.1;
        assert!(from_white_noise(&bad).is_err());
        assert!(from_white_noise_unchecked(&bad).is_ok());

        let mut quiet = data;
        quiet.c = DMatrix::zeros(2, 2);
        quiet.h_s = dm(&[1.0, 0.2, 0.2, 3.0]);
        let g = from_white_noise(&quiet).unwrap();
        assert_eq!(g.d, DMatrix::zeros(2, 2));
        assert_eq!(g.a, dm(&[0.2, 3.0, -1.0, -0.2]));
    }

    #[test]
    fn generator_cp_examples() {
        let k = 1.3;
        let r = cp_check_generator(&thermal(k, 0.0));
        assert!(r.passes);
        assert!(r.margin.abs() < 1e-14);

        let rot = GaussianGenerator::new(
            dm(&[0.0, 2.0, -2.0, 0.0]),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let r = cp_check_generator(&rot);
        assert!(r.passes);
        assert_eq!(r.margin, 0.0);

        let bare = GaussianGenerator::new(
            DMatrix::identity(2, 2) * (-k / 2.0),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let r = cp_check_generator(&bare);
        assert!(!r.passes);
        assert_relative_eq!(r.margin, -k / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn semigroup_scalar_case() {
        let (gamma, d, t) = (0.7, 1.9, 1.3);
        let g = GaussianGenerator::new(
            DMatrix::identity(2, 2) * -gamma,
            DMatrix::identity(2, 2) * d,
            DVector::zeros(2),
        )
        .unwrap();
        let ch = semigroup_channel(&g, t).unwrap();
        assert_relative_eq!(
            ch.x,
            DMatrix::identity(2, 2) * (-gamma * t).exp(),
            epsilon = 1e-15
        );
        let y = d * (1.0 - (-2.0 * gamma * t).exp()) / (2.0 * gamma);
        assert_relative_eq!(ch.y, DMatrix::identity(2, 2) * y, epsilon = 1e-14);
        assert_relative_eq!(
            diffusion_integral(&g.a, &g.d, t, 0.5),
            ch.y,
            epsilon = 1e-14
        );

        let zero = semigroup_channel(&g, 0.0).unwrap();
        assert_eq!(zero, GaussianChannel::identity(1).unwrap());
    }

    #[test]
    fn semigroup_without_hurwitz_drift() {
        let g = GaussianGenerator::new(
            dm(&[0.0, 1.0, -1.0, 0.0]),
            dm(&[1.0, 0.0, 0.0, 1.0]),
            DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        let t = 2.0;
        let ch = semigroup_channel(&g, t).unwrap();
        // rotation with isotropic diffusion accumulates D·t
        assert_relative_eq!(ch.y, DMatrix::identity(2, 2) * t, epsilon = 1e-13);
        let s = MomentState::vacuum(1).unwrap();
        let rk = propagate_moments(&g, &s, t, 2000).unwrap();
        let exact = apply_channel(&ch, &s).unwrap();
        assert_relative_eq!(rk.d, exact.d, epsilon = 1e-10);
        assert_relative_eq!(rk.v, exact.v, epsilon = 1e-10);
    }

    #[test]
    fn singular_drift_displacement() {
        let g = GaussianGenerator::new(
            dm(&[0.0, 1.0, 0.0, 0.0]),
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![0.0, 1.0]),
        )
        .unwrap();
        let ch = semigroup_channel(&g, 2.0).unwrap();
        // ṗ = 1, q̇ = p: q = t²/2
        assert_relative_eq!(ch.delta, DVector::from_vec(vec![2.0, 2.0]), epsilon = 1e-13);
    }

    #[test]
    fn semigroup_law() {
        let g = GaussianGenerator::new(
            dm(&[-0.4, 1.0, -0.8, -0.3]),
            dm(&[0.9, 0.1, 0.1, 0.6]),
            DVector::from_vec(vec![0.3, -0.2]),
        )
        .unwrap();
        let (s, t) = (0.37, 1.21);
        let lhs = compose(
            &semigroup_channel(&g, s).unwrap(),
            &semigroup_channel(&g, t).unwrap(),
        )
        .unwrap();
        let rhs = semigroup_channel(&g, s + t).unwrap();
        assert_relative_eq!(lhs.x, rhs.x, epsilon = 1e-12);
        assert_relative_eq!(lhs.y, rhs.y, epsilon = 1e-12);
        assert_relative_eq!(lhs.delta, rhs.delta, epsilon = 1e-12);
    }

    #[test]
    fn thermal_relaxation_reaches_steady_state() {
        let g = thermal(1.0, 0.5);
        let s = MomentState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 5.0).unwrap();
        let out = propagate_moments(&g, &s, 40.0, 4000).unwrap();
        assert_relative_eq!(out.v, DMatrix::identity(2, 2) * 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hamiltonian_flow_preserves_det() {
        let g = GaussianGenerator::new(
            dm(&[0.3, 1.0, -2.0, -0.3]),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let s = MomentState::new(DVector::zeros(2), dm(&[2.0, 0.3, 0.3, 0.7])).unwrap();
        let out = propagate_moments(&g, &s, 3.0, 3000).unwrap();
        assert_relative_eq!(out.v.determinant(), s.v.determinant(), epsilon = 1e-10);
    }

    #[test]
    fn interleaved_build_matches_grouped() {
        let h = DMatrix::from_fn(4, 4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let c = DMatrix::from_fn(4, 2, |i, j| 0.1 * (i as f64) - 0.3 * (j as f64) + 0.2);
        let bath = symplectic_form(1, Ordering::Grouped).unwrap().into_matrix();
        let grouped = WhiteNoiseData {
            h_s: h.clone(),
            u: DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]),
            c: c.clone(),
            sigma_in: DMatrix::identity(2, 2) * 0.5,
            sigma_in_form: bath.clone(),
            ordering: Ordering::Grouped,
        };
        let p = crate::phase_space::permutation(2).unwrap();
        let inter = WhiteNoiseData {
            h_s: reorder_matrix(&h, Ordering::Grouped, Ordering::Interleaved).unwrap(),
            u: reorder_vector(&grouped.u, Ordering::Grouped, Ordering::Interleaved).unwrap(),
            c: p.transpose() * &c,
            ordering: Ordering::Interleaved,
            ..grouped.clone()
        };
        let a = from_white_noise(&grouped).unwrap();
        let b = from_white_noise(&inter)
            .unwrap()
            .to_ordering(Ordering::Grouped)
            .unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.d, b.d);
        assert_eq!(a.u, b.u);
    }
}
