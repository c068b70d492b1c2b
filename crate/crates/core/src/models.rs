//! Concrete model families: the squeezed-reservoir mode, the non-Markovian
//! `κ(t)e^{tB}` channel family, and a small catalog of EP-free channels.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::{semigroup_channel, GaussianGenerator, LindbladData};
use crate::linalg;
use crate::matrix_equations::{
    expm2, lyapunov_residual, lyapunov_tolerance, solve_lyapunov, stein_jordan_closed_form,
    GaugeCovariance, GaugeSource, JordanDrift2x2,
};
use crate::phase_space::{cp_check, GaussianChannel, Ordering};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedReservoirParams {
    pub kappa: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub r: f64,
    pub phi: f64,
}

impl SqueezedReservoirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r must be non-negative, got {}",
                self.r
            )));
        }
        if !self.delta.is_finite() || !self.epsilon.is_finite() || !self.phi.is_finite() {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(())
    }

    /// Same parameters with the detuning placed on an EP branch.
    pub fn on_branch(&self, branch: EpBranch) -> Self {
        Self {
            delta: branch.sign() * self.epsilon,
            ..*self
        }
    }

    /// Drift eigenvalues `-κ/2 ± √(ε² - Δ²)`.
    pub fn drift_eigenvalues(&self) -> [Complex64; 2] {
        let disc = self.epsilon * self.epsilon - self.delta * self.delta;
        let root = Complex64::new(disc, 0.0).sqrt();
        let base = Complex64::new(-self.kappa / 2.0, 0.0);
        [base + root, base - root]
    }

    fn squeeze_terms(&self) -> (f64, f64, f64, f64) {
        let ch = (2.0 * self.r).cosh();
        let sh = (2.0 * self.r).sinh();
        (ch, sh, self.phi.cos(), self.phi.sin())
    }
}

/// Which exceptional-point line: `Δ = +ε` / `λ = +ω` or `Δ = -ε` / `λ = -ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpBranch {
    Plus,
    Minus,
}

impl EpBranch {
    pub fn sign(self) -> f64 {
        match self {
            EpBranch::Plus => 1.0,
            EpBranch::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EpBranch::Plus => "plus",
            EpBranch::Minus => "minus",
        }
    }
}

/// `A = [[-κ/2, Δ-ε], [-(Δ+ε), -κ/2]]` and the phase-sensitive diffusion.
pub fn squeezed_generator(p: &SqueezedReservoirParams) -> Result<GaussianGenerator> {
    p.validate()?;
    let k = p.kappa;
    let a = DMatrix::from_row_slice(
        2,
        2,
        &[
            -k / 2.0,
            p.delta - p.epsilon,
            -(p.delta + p.epsilon),
            -k / 2.0,
        ],
    );
    let (ch, sh, c, s) = p.squeeze_terms();
    let d =
        DMatrix::from_row_slice(2, 2, &[ch - sh * c, -sh * s, -sh * s, ch + sh * c]) * (k / 2.0);
    Ok(GaussianGenerator {
        a,
        d,
        u: DVector::zeros(2),
        ordering: Ordering::Grouped,
        physical: true,
    })
}

/// Lindblad data of the squeezed-reservoir mode: `H = diag(Δ+ε, Δ-ε)` and a
/// single jump `L = cosh r·a + e^{iφ} sinh r·a†` at rate `κ`.
pub fn squeezed_lindblad_data(p: &SqueezedReservoirParams) -> Result<LindbladData> {
    p.validate()?;
    let (c, s) = (p.r.cosh(), p.r.sinh());
    let e = Complex64::from_polar(1.0, p.phi);
    let w = 1.0 / 2f64.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let l = DVector::from_vec(vec![(e * s + c) * w, i * (-e * s + c) * w]);
    Ok(LindbladData {
        h: DMatrix::from_row_slice(2, 2, &[p.delta + p.epsilon, 0.0, 0.0, p.delta - p.epsilon]),
        f: DVector::zeros(2),
        jump_rows: vec![l],
        rate: p.kappa,
        ordering: Ordering::Grouped,
    })
}

/// Closed-form Lyapunov solution on an EP branch; `p.delta` is ignored.
///
/// With `C∓ = cosh 2r ∓ sinh 2r cos φ` and `σ = sinh 2r sin φ`:
///
/// * `Δ = +ε`: `s_qq = C₋/2`, `s_qp = -σ/2 - (ε/κ)C₋`,
///   `s_pp = C₊/2 + (2ε/κ)σ + (4ε²/κ²)C₋`;
/// * `Δ = -ε`: `s_pp = C₊/2`, `s_qp = -σ/2 - (ε/κ)C₊`,
///   `s_qq = C₋/2 + (2ε/κ)σ + (4ε²/κ²)C₊`.
pub fn squeezed_ep_gauge(p: &SqueezedReservoirParams, branch: EpBranch) -> Result<GaugeCovariance> {
    p.validate()?;
    let q = p.on_branch(branch);
    let (ch, sh, c, s) = q.squeeze_terms();
    let cm = ch - sh * c;
    let cp = ch + sh * c;
    let sig = sh * s;
    let e = q.epsilon / q.kappa;
    let (sqq, sqp, spp) = match branch {
        EpBranch::Plus => (
            0.5 * cm,
            -0.5 * sig - e * cm,
            0.5 * cp + 2.0 * e * sig + 4.0 * e * e * cm,
        ),
        EpBranch::Minus => (
            0.5 * cm + 2.0 * e * sig + 4.0 * e * e * cp,
            -0.5 * sig - e * cp,
            0.5 * cp,
        ),
    };
    let sm = DMatrix::from_row_slice(2, 2, &[sqq, sqp, sqp, spp]);
    let g = squeezed_generator(&q)?;
    let residual = lyapunov_residual(&g.a, &sm, &g.d);
    let tolerance = lyapunov_tolerance(&g.a, &sm, &g.d);
    GaugeCovariance::accept(sm, GaugeSource::EpBranchFormula, residual, tolerance)
}

/// Closed-form Lyapunov solution anywhere in the Hurwitz region:
/// `s_qp = (κD_qp + (Δ-ε)D_pp - (Δ+ε)D_qq) / (κ² + 4(Δ² - ε²))`, then
/// `s_qq = D_qq/κ + 2(Δ-ε)s_qp/κ` and `s_pp = D_pp/κ - 2(Δ+ε)s_qp/κ`.
pub fn squeezed_general_gauge(p: &SqueezedReservoirParams) -> Result<GaugeCovariance> {
    let g = squeezed_generator(p)?;
    let k = p.kappa;
    let den = k * k + 4.0 * (p.delta * p.delta - p.epsilon * p.epsilon);
    if !(den > 0.0) {
        let max_real_part = p
            .drift_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NotHurwitz { max_real_part });
    }
    let (dqq, dqp, dpp) = (g.d[(0, 0)], g.d[(0, 1)], g.d[(1, 1)]);
    let sqp = (k * dqp + (p.delta - p.epsilon) * dpp - (p.delta + p.epsilon) * dqq) / den;
    let sqq = dqq / k + 2.0 * (p.delta - p.epsilon) * sqp / k;
    let spp = dpp / k - 2.0 * (p.delta + p.epsilon) * sqp / k;
    let sm = DMatrix::from_row_slice(2, 2, &[sqq, sqp, sqp, spp]);
    let residual = lyapunov_residual(&g.a, &sm, &g.d);
    let tolerance = lyapunov_tolerance(&g.a, &sm, &g.d);
    GaugeCovariance::accept(sm, GaugeSource::Lyapunov, residual, tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionModel {
    /// `Y = y I`.
    Isotropic,
    /// `Y = diag(g eˢ, g e⁻ˢ)` with constant asymmetry `s`.
    Anisotropic { s: f64 },
    /// `Y = ν(I + α BBᵀ/Tr BBᵀ)` with `ν` fixed by `det Y = g²`.
    DriftAligned { alpha: f64 },
}

impl DiffusionModel {
    pub fn name(&self) -> &'static str {
        match self {
            DiffusionModel::Isotropic => "iso",
            DiffusionModel::Anisotropic { .. } => "aniso",
            DiffusionModel::DriftAligned { .. } => "drift-aligned",
        }
    }

    /// `Y_t` for memory factor `kappa_t`, drift generator `b` and buffer `eps_buf`.
    ///
    /// Every model has `det Y = g²` with `g = |1 - κ²|/2 + ε_buf`.
    pub fn covariance(&self, kappa_t: f64, b: &DMatrix<f64>, eps_buf: f64) -> Result<DMatrix<f64>> {
        let g = 0.5 * (1.0 - kappa_t * kappa_t).abs() + eps_buf;
        match *self {
            DiffusionModel::Isotropic => Ok(DMatrix::identity(2, 2) * g),
            DiffusionModel::Anisotropic { s } => Ok(DMatrix::from_row_slice(
                2,
                2,
                &[g * s.exp(), 0.0, 0.0, g * (-s).exp()],
            )),
            DiffusionModel::DriftAligned { alpha } => {
                let bbt = b * b.transpose();
                let tr = bbt.trace();
                if !(tr > 0.0) {
                    return Err(Error::DegenerateModel(
                        "drift-aligned diffusion needs B ≠ 0",
                    ));
                }
                let m = bbt / tr;
                let det_m = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                let det = 1.0 + alpha + alpha * alpha * det_m;
                let nu = g / det.sqrt();
                Ok(linalg::symmetrize(
                    &((DMatrix::identity(2, 2) + m * alpha) * nu),
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmFamilyParams {
    pub lambda: f64,
    pub omega: f64,
    pub gamma: f64,
    pub r_mem: f64,
    pub nu: f64,
    pub model: DiffusionModel,
    pub eps_buf: f64,
}

impl NmFamilyParams {
    /// Enforces `0 < r_mem < γ/ν`, `ε_buf > 0` and model-specific ranges.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.lambda,
            self.omega,
            self.gamma,
            self.r_mem,
            self.nu,
            self.eps_buf,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if !(self.gamma > 0.0) || !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(
                "gamma and nu must be positive".into(),
            ));
        }
        if !(self.r_mem > 0.0 && self.r_mem < self.gamma / self.nu) {
            return Err(Error::InvalidParameter(format!(
                "r_mem must lie in (0, gamma/nu) = (0, {}), got {}",
                self.gamma / self.nu,
                self.r_mem
            )));
        }
        if !(self.eps_buf > 0.0) {
            return Err(Error::InvalidParameter("eps_buf must be positive".into()));
        }
        match self.model {
            DiffusionModel::Anisotropic { s } if !s.is_finite() => {
                Err(Error::InvalidParameter("anisotropy must be finite".into()))
            }
            DiffusionModel::DriftAligned { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter("alpha must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// `κ(t) = exp(-γt + r_mem sin νt)`.
    pub fn memory_factor(&self, t: f64) -> f64 {
        (-self.gamma * t + self.r_mem * (self.nu * t).sin()).exp()
    }

    pub fn b(&self) -> DMatrix<f64> {
        drift_b(self.lambda, self.omega)
    }

    /// Same parameters placed on an EP line `λ = ±ω`.
    pub fn on_branch(&self, branch: EpBranch) -> Self {
        Self {
            lambda: branch.sign() * self.omega,
            ..*self
        }
    }
}

/// `B(λ, ω) = [[λ, ω], [-ω, -λ]]`, with `B² = (λ² - ω²)I`.
pub fn drift_b(lambda: f64, omega: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[lambda, omega, -omega, -lambda])
}

/// `(κ(t)e^{tB}, Y_t, 0)`, flagged physical after the determinant CP check.
pub fn nm_channel(p: &NmFamilyParams, t: f64) -> Result<GaussianChannel> {
    p.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be positive, got {t}"
        )));
    }
    let b = p.b();
    let k = p.memory_factor(t);
    let x = expm2(&b, t) * k;
    let y = p.model.covariance(k, &b, p.eps_buf)?;
    let mut ch = GaussianChannel::new(x, y, DVector::zeros(2))?;
    let report = cp_check(&ch);
    if !report.passes {
        return Err(Error::NotCompletelyPositive {
            margin: report.margin,
        });
    }
    ch.physical = true;
    Ok(ch)
}

/// Jordan closed-form Stein solution of the family on `λ = ±ω`; `p.lambda`
/// is ignored.
pub fn nm_ep_gauge(p: &NmFamilyParams, t: f64, branch: EpBranch) -> Result<GaugeCovariance> {
    let q = p.on_branch(branch);
    q.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be positive, got {t}"
        )));
    }
    if q.omega == 0.0 {
        return Err(Error::DegenerateModel("EP line needs ω ≠ 0"));
    }
    let k = q.memory_factor(t);
    if k * k >= 1.0 {
        return Err(Error::Unstable { spectral_radius: k });
    }
    let b = q.b();
    let y = q.model.covariance(k, &b, q.eps_buf)?;
    let j = JordanDrift2x2::new(k, b, t)?;
    stein_jordan_closed_form(&j, &y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    ThermalLoss { eta: f64, nbar: f64 },
    QuadratureDiffusion { sigma2: f64 },
    CriticalOscillator { omega0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogItem {
    Channel(GaussianChannel),
    Generator(GaussianGenerator),
}

/// Critically damped oscillator: `A = -ω₀I + N` with `N = [[0,1],[0,0]]` and
/// `D = ω₀I`, the smallest isotropic diffusion that keeps it CP.
pub fn critical_oscillator(omega0: f64) -> Result<GaussianGenerator> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    let a = DMatrix::from_row_slice(2, 2, &[-omega0, 1.0, 0.0, -omega0]);
    Ok(GaussianGenerator {
        a,
        d: DMatrix::identity(2, 2) * omega0,
        u: DVector::zeros(2),
        ordering: Ordering::Grouped,
        physical: true,
    })
}

/// EP-free reference models. The oscillator returns its generator unless a
/// time is given.
pub fn ep_free_catalog(entry: CatalogEntry, t: Option<f64>) -> Result<CatalogItem> {
    match entry {
        CatalogEntry::ThermalLoss { eta, nbar } => {
            if !(0.0..=1.0).contains(&eta) || !(nbar >= 0.0) || !nbar.is_finite() {
                return Err(Error::InvalidParameter(
                    "need eta in [0,1] and nbar ≥ 0".into(),
                ));
            }
            let y = (1.0 - eta) / 2.0 * (2.0 * nbar + 1.0);
            let ch = GaussianChannel::physical(
                DMatrix::identity(2, 2) * eta.sqrt(),
                DMatrix::identity(2, 2) * y,
                DVector::zeros(2),
            )?;
            Ok(CatalogItem::Channel(ch))
        }
        CatalogEntry::QuadratureDiffusion { sigma2 } => {
            if !(sigma2 >= 0.0) || !sigma2.is_finite() {
                return Err(Error::InvalidParameter("need sigma2 ≥ 0".into()));
            }
            let y = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, sigma2]);
            let ch = GaussianChannel::physical(DMatrix::identity(2, 2), y, DVector::zeros(2))?;
            Ok(CatalogItem::Channel(ch))
        }
        CatalogEntry::CriticalOscillator { omega0 } => {
            let g = critical_oscillator(omega0)?;
            match t {
                None => Ok(CatalogItem::Generator(g)),
                Some(t) => Ok(CatalogItem::Channel(semigroup_channel(&g, t)?)),
            }
        }
    }
}

/// Phase grid helper: `count` points on `[0, 2π]` inclusive.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 2.0 * PI * k as f64 / (count - 1) as f64)
        .collect()
}

/// Lyapunov solution of the squeezed generator, used to cross-check the
/// closed forms.
pub fn squeezed_lyapunov(p: &SqueezedReservoirParams) -> Result<GaugeCovariance> {
    let g = squeezed_generator(p)?;
    solve_lyapunov(&g.a, &g.d)
}
