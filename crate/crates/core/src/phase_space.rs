//! Symplectic conventions, moment states, Gaussian channels and their algebra.
//!
//! Quadratures are stored in grouped order `(q1..qN, p1..pN)` unless a value
//! says otherwise. Interleaved order `(q1, p1, q2, p2, ..)` is accepted at the
//! boundaries and converted with [`reorder_matrix`] / [`reorder_vector`].
//! The vacuum covariance is `I/2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, psd_tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    /// `(q1..qN, p1..pN)`
    Grouped,
    /// `(q1, p1, q2, p2, ..)`
    Interleaved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    ordering: Ordering,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(modes: usize, ordering: Ordering) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "mode count must be at least 1".into(),
            ));
        }
        let n = modes;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        match ordering {
            Ordering::Grouped => {
                for i in 0..n {
                    m[(i, n + i)] = 1.0;
                    m[(n + i, i)] = -1.0;
                }
            }
            Ordering::Interleaved => {
                for i in 0..n {
                    m[(2 * i, 2 * i + 1)] = 1.0;
                    m[(2 * i + 1, 2 * i)] = -1.0;
                }
            }
        }
        Ok(Self {
            modes,
            ordering,
            matrix: m,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub fn symplectic_form(modes: usize, ordering: Ordering) -> Result<SymplecticForm> {
    SymplecticForm::new(modes, ordering)
}

/// Symplectic matrix for a phase-space dimension `dim = 2N`.
pub(crate) fn form_for_dim(dim: usize, ordering: Ordering) -> Result<DMatrix<f64>> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "phase-space dimension {dim} is not 2N"
        )));
    }
    Ok(SymplecticForm::new(dim / 2, ordering)?.into_matrix())
}

/// Grouped position of the interleaved index `k`.
fn grouped_index(k: usize, modes: usize) -> usize {
    if k.is_multiple_of(2) {
        k / 2
    } else {
        modes + k / 2
    }
}

/// Index map `target[map[k]] = source[k]` for a conversion between orderings.
fn index_map(dim: usize, from: Ordering, to: Ordering) -> Result<Vec<usize>> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "phase-space dimension {dim} is not 2N"
        )));
    }
    let n = dim / 2;
    let mut map: Vec<usize> = (0..dim).collect();
    match (from, to) {
        (Ordering::Interleaved, Ordering::Grouped) => {
            for (k, slot) in map.iter_mut().enumerate() {
                *slot = grouped_index(k, n);
            }
        }
        (Ordering::Grouped, Ordering::Interleaved) => {
            for k in 0..dim {
                map[grouped_index(k, n)] = k;
            }
        }
        _ => {}
    }
    Ok(map)
}

/// The permutation `P` with `x_grouped = P x_interleaved`.
pub fn permutation(modes: usize) -> Result<DMatrix<f64>> {
    let dim = 2 * modes;
    let map = index_map(dim, Ordering::Interleaved, Ordering::Grouped)?;
    let mut p = DMatrix::zeros(dim, dim);
    for (k, &g) in map.iter().enumerate() {
        p[(g, k)] = 1.0;
    }
    Ok(p)
}

/// Conjugates a matrix by the ordering permutation. Pure index shuffling, so
/// round trips are exact. Identical orderings return a copy.
pub fn reorder_matrix(m: &DMatrix<f64>, from: Ordering, to: Ordering) -> Result<DMatrix<f64>> {
    let dim = linalg::require_square(m)?;
    let map = index_map(dim, from, to)?;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

pub fn reorder_vector(v: &DVector<f64>, from: Ordering, to: Ordering) -> Result<DVector<f64>> {
    let map = index_map(v.len(), from, to)?;
    let mut out = DVector::zeros(v.len());
    for (k, &m) in map.iter().enumerate() {
        out[m] = v[k];
    }
    Ok(out)
}

/// First moments and covariance of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl MomentState {
    pub fn new(d: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let dim = linalg::require_square(&v)?;
        linalg::require_len(&d, dim)?;
        if dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "phase-space dimension {dim} is not 2N"
            )));
        }
        Ok(Self { d, v })
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "mode count must be at least 1".into(),
            ));
        }
        let dim = 2 * modes;
        Ok(Self {
            d: DVector::zeros(dim),
            v: DMatrix::identity(dim, dim) * 0.5,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Least eigenvalue of `V + (i/2)Σ`; non-negative for physical states.
    pub fn uncertainty_margin(&self, ordering: Ordering) -> Result<f64> {
        let sigma = form_for_dim(self.dim(), ordering)?;
        let h = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            Complex64::new(self.v[(i, j)], 0.5 * sigma[(i, j)])
        });
        Ok(linalg::hermitian_min_eigenvalue(&h))
    }

    pub fn is_physical(&self, ordering: Ordering) -> Result<bool> {
        let margin = self.uncertainty_margin(ordering)?;
        Ok(linalg::asymmetry(&self.v) <= psd_tolerance(self.v.amax())
            && margin >= -psd_tolerance(self.v.amax()))
    }
}

/// Channel parameters `(X, Y, δ)` acting as `d -> Xd + δ`, `V -> XVXᵀ + Y`.
///
/// `physical` records that complete positivity was checked and holds. Gauged
/// representatives are deliberately left unflagged.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub delta: DVector<f64>,
    pub ordering: Ordering,
    pub physical: bool,
}

impl GaussianChannel {
    /// Builds an unflagged channel in grouped ordering.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>, delta: DVector<f64>) -> Result<Self> {
        Self::with_ordering(x, y, delta, Ordering::Grouped)
    }

    pub fn with_ordering(
        x: DMatrix<f64>,
        y: DMatrix<f64>,
        delta: DVector<f64>,
        ordering: Ordering,
    ) -> Result<Self> {
        let dim = linalg::require_square(&x)?;
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "phase-space dimension {dim} is not 2N"
            )));
        }
        linalg::require_shape(&y, dim)?;
        linalg::require_len(&delta, dim)?;
        if linalg::asymmetry(&y) > psd_tolerance(y.amax()) {
            return Err(Error::InvalidParameter("Y must be symmetric".into()));
        }
        Ok(Self {
            x,
            y,
            delta,
            ordering,
            physical: false,
        })
    }

    /// Builds a channel and flags it physical, rejecting non-CP parameters.
    pub fn physical(x: DMatrix<f64>, y: DMatrix<f64>, delta: DVector<f64>) -> Result<Self> {
        let mut ch = Self::new(x, y, delta)?;
        let report = cp_check(&ch);
        if !report.passes {
            return Err(Error::NotCompletelyPositive {
                margin: report.margin,
            });
        }
        ch.physical = true;
        Ok(ch)
    }

    /// Accepts interleaved parameters and converts them to grouped order.
    pub fn from_interleaved(x: DMatrix<f64>, y: DMatrix<f64>, delta: DVector<f64>) -> Result<Self> {
        Self::with_ordering(x, y, delta, Ordering::Interleaved)?.to_ordering(Ordering::Grouped)
    }

    pub fn identity(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "mode count must be at least 1".into(),
            ));
        }
        let dim = 2 * modes;
        Ok(Self {
            x: DMatrix::identity(dim, dim),
            y: DMatrix::zeros(dim, dim),
            delta: DVector::zeros(dim),
            ordering: Ordering::Grouped,
            physical: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn to_ordering(&self, to: Ordering) -> Result<Self> {
        Ok(Self {
            x: reorder_matrix(&self.x, self.ordering, to)?,
            y: reorder_matrix(&self.y, self.ordering, to)?,
            delta: reorder_vector(&self.delta, self.ordering, to)?,
            ordering: to,
            physical: self.physical,
        })
    }
}

pub fn apply_channel(ch: &GaussianChannel, s: &MomentState) -> Result<MomentState> {
    if s.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: s.dim(),
        });
    }
    let d = &ch.x * &s.d + &ch.delta;
    let v = &ch.x * &s.v * ch.x.transpose() + &ch.y;
    Ok(MomentState {
        d,
        v: linalg::symmetrize(&v),
    })
}

/// Returns `ch2 ∘ ch1`, i.e. `ch1` acts first.
pub fn compose(ch2: &GaussianChannel, ch1: &GaussianChannel) -> Result<GaussianChannel> {
    if ch2.dim() != ch1.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch2.dim(),
            found: ch1.dim(),
        });
    }
    if ch2.ordering != ch1.ordering {
        return Err(Error::OrderingMismatch);
    }
    Ok(GaussianChannel {
        x: &ch2.x * &ch1.x,
        y: &ch2.x * &ch1.y * ch2.x.transpose() + &ch2.y,
        delta: &ch2.x * &ch1.delta + &ch2.delta,
        ordering: ch1.ordering,
        physical: ch1.physical && ch2.physical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpMethod {
    HermitianEig,
    DetCondition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub passes: bool,
    /// Least eigenvalue of the Hermitian CP matrix, or the determinant slack.
    pub margin: f64,
    pub method: CpMethod,
    pub tolerance: f64,
}

/// The Hermitian matrix `Y + (i/2)(Σ - XΣXᵀ)`.
pub fn cp_matrix(ch: &GaussianChannel) -> Result<DMatrix<Complex64>> {
    let sigma = form_for_dim(ch.dim(), ch.ordering)?;
    let k = &sigma - &ch.x * &sigma * ch.x.transpose();
    let n = ch.dim();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(ch.y[(i, j)], 0.5 * k[(i, j)])
    }))
}

/// Complete positivity through the least eigenvalue of the Hermitian CP matrix.
pub fn cp_check_hermitian(ch: &GaussianChannel) -> CpReport {
    let h = match cp_matrix(ch) {
        Ok(h) => h,
        Err(_) => {
            return CpReport {
                passes: false,
                margin: f64::NAN,
                method: CpMethod::HermitianEig,
                tolerance: 0.0,
            }
        }
    };
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

/// `α = (1 - det X)/2`, the one-mode determinant-condition intermediate.
pub fn det_alpha(x: &DMatrix<f64>) -> f64 {
    let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    0.5 * (1.0 - det)
}

/// One-mode complete positivity: `Y ⪰ 0` and `det Y ≥ α²`.
///
/// The reported margin is `det Y - α²` unless a diagonal entry of `Y` is
/// more negative.
pub fn cp_check_det(ch: &GaussianChannel) -> Result<CpReport> {
    if ch.dim() != 2 {
        return Err(Error::InvalidDimension(
            "determinant condition needs one mode".into(),
        ));
    }
    let y = &ch.y;
    let alpha = det_alpha(&ch.x);
    let y12 = 0.5 * (y[(0, 1)] + y[(1, 0)]);
    let det_y = y[(0, 0)] * y[(1, 1)] - y12 * y12;
    let slack = det_y - alpha * alpha;
    let diag = y[(0, 0)].min(y[(1, 1)]);
    let margin = if diag < 0.0 { diag.min(slack) } else { slack };
    let scale = y.amax().max(alpha.abs());
    let tolerance = psd_tolerance(scale) * (1.0 + y[(0, 0)].abs() + y[(1, 1)].abs());
    Ok(CpReport {
        passes: margin >= -tolerance,
        margin,
        method: CpMethod::DetCondition,
        tolerance,
    })
}

/// One mode uses the determinant condition, more modes the Hermitian test.
pub fn cp_check(ch: &GaussianChannel) -> CpReport {
    if ch.dim() == 2 {
        if let Ok(r) = cp_check_det(ch) {
            return r;
        }
    }
    cp_check_hermitian(ch)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementGauge {
    /// The input channel with δ removed.
    pub channel: GaussianChannel,
    /// Conjugating displacement `χ = -(I - X)⁻¹δ`.
    pub chi: DVector<f64>,
    /// 2-norm condition number of `I - X`.
    pub condition: f64,
}

pub fn displacement_gauge(ch: &GaussianChannel) -> Result<DisplacementGauge> {
    let n = ch.dim();
    let m = DMatrix::identity(n, n) - &ch.x;
    let sv = linalg::singular_values(&m);
    let (big, small) = (sv[0], sv[n - 1]);
    let condition = if small > 0.0 {
        big / small
    } else {
        f64::INFINITY
    };
    if small <= linalg::PIVOT_THRESHOLD * big.max(1.0) {
        return Err(Error::NotGaugeable { condition });
    }
    let chi = -linalg::lu_solve(m, &ch.delta).ok_or(Error::NotGaugeable { condition })?;
    let mut channel = ch.clone();
    channel.delta = DVector::zeros(n);
    Ok(DisplacementGauge {
        channel,
        chi,
        condition,
    })
}
