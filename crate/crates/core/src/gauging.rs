//! Diffusion gauging by Gaussian smoothing maps.
//!
//! Conjugating a channel `Ψ` by `𝒱_S = (I, S, 0)` gives parameters
//! `(X, Y + XSXᵀ - S, δ)`, so the Stein solution removes `Y` entirely. For a
//! semigroup the Lyapunov solution does the same at every time at once.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{diffusion_integral, GaussianGenerator, SemigroupOptions};
use crate::linalg::{self, psd_tolerance};
use crate::matrix_equations::{
    expm, solve_lyapunov, solve_stein, stein_tolerance, GaugeCovariance,
};
use crate::phase_space::{compose, GaussianChannel};
use crate::spectrum::{jordan_structure, JordanReport};

/// The smoothing map `(I, S, 0)` and its formal inverse `(I, -S, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingMap {
    pub s: DMatrix<f64>,
}

impl SmoothingMap {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        linalg::require_square(&s)?;
        if linalg::asymmetry(&s) > psd_tolerance(s.amax()) {
            return Err(Error::InvalidParameter("S must be symmetric".into()));
        }
        Ok(Self { s })
    }

    pub fn channel(&self) -> Result<GaussianChannel> {
        let n = self.s.nrows();
        GaussianChannel::new(DMatrix::identity(n, n), self.s.clone(), DVector::zeros(n))
    }

    /// `(I, -S, 0)`; generically not completely positive.
    pub fn inverse_channel(&self) -> Result<GaussianChannel> {
        let n = self.s.nrows();
        GaussianChannel::new(DMatrix::identity(n, n), -&self.s, DVector::zeros(n))
    }

    /// `𝒱_S⁻¹ ∘ Ψ ∘ 𝒱_S`.
    pub fn conjugate(&self, ch: &GaussianChannel) -> Result<GaussianChannel> {
        let mut fwd = self.channel()?;
        let mut inv = self.inverse_channel()?;
        fwd.ordering = ch.ordering;
        inv.ordering = ch.ordering;
        let mut out = compose(&inv, &compose(ch, &fwd)?)?;
        out.physical = false;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugingResult {
    /// `(X, ≈0, δ)`, never flagged physical.
    pub gauged: GaussianChannel,
    pub s: GaugeCovariance,
    /// Max-abs entry of the gauged `Y`.
    pub residual_y: f64,
    pub tolerance: f64,
}

/// Removes `Y` from a Schur-stable channel with the Stein solution.
pub fn gauge_channel(ch: &GaussianChannel) -> Result<GaugingResult> {
    let s = solve_stein(&ch.x, &ch.y)?;
    let gauged = SmoothingMap { s: s.s.clone() }.conjugate(ch)?;
    let residual_y = gauged.y.amax();
    // one order looser than the solver's own bound: conjugation adds a few roundings
    let tolerance = 10.0 * stein_tolerance(&ch.x, &s.s, &ch.y);
    if !(residual_y <= tolerance) {
        return Err(Error::Inaccurate {
            residual: residual_y,
            tolerance,
        });
    }
    Ok(GaugingResult {
        gauged,
        s,
        residual_y,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupGauge {
    pub s: GaugeCovariance,
    /// `(t, max-abs gauged Y_t)` in the order the times were given.
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
}

/// Twenty log-spaced times in `[1e-3, 10/|max Re λ(A)|]`.
pub fn default_times(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let max_re = linalg::max_real_part(&linalg::eigenvalues(a));
    if !(max_re < 0.0) {
        return Err(Error::NotHurwitz {
            max_real_part: max_re,
        });
    }
    let lo: f64 = 1e-3;
    let hi = (10.0 / max_re.abs()).max(2.0 * lo);
    let n = 20;
    Ok((0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Gauges every `Ψ_t` of a Hurwitz generator with the single Lyapunov solution.
///
/// `Y_t` is evaluated by direct integration rather than through `S`, so the
/// residual is an honest check of `Y_t = S - X_t S X_tᵀ`.
pub fn gauge_semigroup(g: &GaussianGenerator, times: Option<&[f64]>) -> Result<SemigroupGauge> {
    let s = solve_lyapunov(&g.a, &g.d)?;
    let owned;
    let times = match times {
        Some(t) => t,
        None => {
            owned = default_times(&g.a)?;
            &owned
        }
    };
    if let Some(bad) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {bad}"
        )));
    }
    let map = SmoothingMap { s: s.s.clone() };
    let step = SemigroupOptions::default().max_step_norm;
    let n = g.dim();
    let residuals: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let x = expm(&(&g.a * t));
            let y = diffusion_integral(&g.a, &g.d, t, step);
            let ch = GaussianChannel {
                x,
                y,
                delta: DVector::zeros(n),
                ordering: g.ordering,
                physical: false,
            };
            map.conjugate(&ch).map(|c| (t, c.y.amax()))
        })
        .collect::<Result<_>>()?;
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(SemigroupGauge {
        s,
        residuals,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCheck {
    /// Gauged drift equals the original bit for bit.
    pub x_unchanged: bool,
    pub original: JordanReport,
    pub gauged: JordanReport,
    /// Block sizes and defectiveness agree.
    pub structure_matches: bool,
    /// Largest distance between matched eigenvalues.
    pub max_eigenvalue_shift: f64,
}

/// Confirms that gauging leaves the drift, its spectrum and its Jordan data intact.
pub fn similarity_spectrum_check(ch: &GaussianChannel) -> Result<SpectrumCheck> {
    let result = gauge_channel(ch)?;
    let x_unchanged = bitwise_equal(&ch.x, &result.gauged.x);
    let original = jordan_structure(&ch.x, 1e-10)?;
    let gauged = jordan_structure(&result.gauged.x, 1e-10)?;
    let structure_matches =
        original.defective == gauged.defective && original.block_sizes == gauged.block_sizes;
    let before = linalg::eigenvalues(&ch.x);
    let after = linalg::eigenvalues(&result.gauged.x);
    let max_eigenvalue_shift = linalg::multiset_distance(&before, &after).unwrap_or(f64::INFINITY);
    Ok(SpectrumCheck {
        x_unchanged,
        original,
        gauged,
        structure_matches,
        max_eigenvalue_shift,
    })
}

pub fn bitwise_equal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.shape() == b.shape()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{semigroup_channel, GaussianGenerator};
    use crate::phase_space::cp_check;
    use approx::assert_relative_eq;

    fn dm(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, v)
    }

    #[test]
    fn smoothing_inverse_is_exact() {
        let m = SmoothingMap::new(dm(&[1.3, 0.2, 0.2, 0.4])).unwrap();
        let c = compose(&m.channel().unwrap(), &m.inverse_channel().unwrap()).unwrap();
        assert_eq!(
            c,
            GaussianChannel {
                physical: false,
                ..GaussianChannel::identity(1).unwrap()
            }
        );
        assert!(!cp_check(&m.inverse_channel().unwrap()).passes);
    }

    #[test]
    fn attenuator_gauge() {
        let ch = GaussianChannel::new(
            DMatrix::identity(2, 2) * 0.5f64.sqrt(),
            DMatrix::identity(2, 2) * 0.25,
            DVector::zeros(2),
        )
        .unwrap();
        let r = gauge_channel(&ch).unwrap();
        assert_relative_eq!(r.s.s, DMatrix::identity(2, 2) * 0.5, epsilon = 1e-15);
        assert_eq!(r.gauged.x, ch.x);
        assert!(r.residual_y < 1e-15);
        assert!(!r.gauged.physical);
    }

    #[test]
    fn noiseless_channel_is_untouched() {
        let ch = GaussianChannel::new(
            dm(&[0.3, 0.1, -0.2, 0.5]),
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        let r = gauge_channel(&ch).unwrap();
        assert_eq!(r.s.s, DMatrix::zeros(2, 2));
        assert_eq!(r.gauged.y, DMatrix::zeros(2, 2));
        assert_eq!(r.gauged.delta, ch.delta);
    }

    #[test]
    fn jordan_channel_gauge() {
        let n = dm(&[0.0, 1.0, 0.0, 0.0]);
        let x = (DMatrix::identity(2, 2) + n * 0.6) * 0.5;
        let ch =
            GaussianChannel::new(x.clone(), DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let r = gauge_channel(&ch).unwrap();
        assert_relative_eq!(
            r.s.s,
            dm(&[8.0 / 5.0, 4.0 / 15.0, 4.0 / 15.0, 4.0 / 3.0]),
            epsilon = 1e-14
        );
        assert!(bitwise_equal(&r.gauged.x, &x));
        let check = similarity_spectrum_check(&ch).unwrap();
        assert!(check.x_unchanged && check.structure_matches);
        assert!(check.original.defective);
    }

    #[test]
    fn thermal_semigroup_gauge() {
        let (kappa, nbar) = (0.9, 0.7);
        let g = GaussianGenerator::new(
            DMatrix::identity(2, 2) * (-kappa / 2.0),
            DMatrix::identity(2, 2) * (kappa * (2.0 * nbar + 1.0) / 2.0),
            DVector::zeros(2),
        )
        .unwrap();
        let r = gauge_semigroup(&g, Some(&[0.0, 0.1, 1.0, 10.0])).unwrap();
        assert!(r.max_residual <= 1e-10);
        assert_relative_eq!(
            r.s.s,
            DMatrix::identity(2, 2) * ((2.0 * nbar + 1.0) / 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn noiseless_generator() {
        let g = GaussianGenerator::new(
            dm(&[-0.3, 1.0, -1.0, -0.3]),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let r = gauge_semigroup(&g, None).unwrap();
        assert_eq!(r.s.s, DMatrix::zeros(2, 2));
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.residuals.len(), 20);
    }

    #[test]
    fn squeezed_ep_semigroup_gauge() {
        let g = GaussianGenerator::new(
            dm(&[-1.0, 0.0, -2.0, -1.0]),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let r = gauge_semigroup(&g, None).unwrap();
        assert!(r.max_residual <= 1e-9, "{}", r.max_residual);
        assert_relative_eq!(r.s.s, dm(&[0.5, -0.5, -0.5, 1.5]), epsilon = 1e-15);
    }

    #[test]
    fn derivative_at_zero_recovers_diffusion() {
        let a = dm(&[-0.6, 0.9, -1.1, -0.2]);
        let d = dm(&[0.8, 0.1, 0.1, 0.5]);
        let g = GaussianGenerator::new(a, d.clone(), DVector::zeros(2)).unwrap();
        let h = 1e-4;
        let plus = semigroup_channel(&g, h).unwrap().y;
        let minus = semigroup_channel(&g, -h).err();
        assert!(minus.is_some());
        // Y_t is odd to leading order: F(t) = S - e^{At} S e^{Aᵀt} extends to t < 0
        let s = solve_lyapunov(&g.a, &g.d).unwrap().s;
        let back = expm(&(&g.a * -h));
        let f_minus = &s - &back * &s * back.transpose();
        let fd = (plus - f_minus) / (2.0 * h);
        assert_relative_eq!(fd, d, epsilon = 1e-6);
    }
}
