//! Exceptional-point detection through Jordan structure, additive
//! Ornstein-Uhlenbeck spectra and polynomial restriction matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::GaussianGenerator;
use crate::linalg;

/// Largest total degree accepted by [`truncated_ou_matrix`].
pub const MAX_OU_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanReport {
    /// Distinct eigenvalues with algebraic multiplicities.
    pub eigenvalues: Vec<(Complex64, usize)>,
    /// Jordan block sizes per distinct eigenvalue, descending.
    pub block_sizes: Vec<Vec<usize>>,
    pub defective: bool,
    /// Smallest pairwise distance among all eigenvalues (with multiplicity).
    pub coalescence_gap: f64,
    pub tolerance: f64,
}

impl JordanReport {
    /// Block sizes at the distinct eigenvalue closest to `z`.
    pub fn blocks_near(&self, z: Complex64) -> Option<&[usize]> {
        let idx = self
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - z).norm().total_cmp(&(b.1 .0 - z).norm()))?
            .0;
        Some(&self.block_sizes[idx])
    }
}

/// Jordan structure of a real square matrix.
///
/// 2x2 input is decided from the discriminant: defective iff
/// `|disc| < tol·scale²` and `M` is not a multiple of the identity
/// (`‖M - (trM/2)I‖ > tol·scale`). Larger input clusters eigenvalues with a
/// shrinking tolerance until every cluster of size `m` is confirmed by the
/// nullity of `(M - λ̄I)^m`, then reads block sizes off the rank sequence of
/// `(M - λ̄I)^k`, with `tol` as the relative singular-value threshold.
pub fn jordan_structure(m: &DMatrix<f64>, tol: f64) -> Result<JordanReport> {
    let n = linalg::require_square(m)?;
    if n == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if n == 2 {
        return Ok(jordan_2x2(m, tol));
    }
    Ok(jordan_general(m, tol))
}

fn jordan_2x2(m: &DMatrix<f64>, tol: f64) -> JordanReport {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    let half = 0.5 * (a + d);
    let off_scalar = (0.5 * (a - d)).abs().max(b.abs()).max(c.abs());
    let gap = 2.0 * disc.abs().sqrt();
    if disc.abs() < tol * scale * scale {
        let lam = Complex64::new(half, 0.0);
        let defective = off_scalar > tol * scale;
        let blocks = if defective { vec![2] } else { vec![1, 1] };
        return JordanReport {
            eigenvalues: vec![(lam, 2)],
            block_sizes: vec![blocks],
            defective,
            coalescence_gap: gap,
            tolerance: tol,
        };
    }
    let eigs = linalg::eigenvalues_2x2(a, b, c, d);
    JordanReport {
        eigenvalues: vec![(eigs[0], 1), (eigs[1], 1)],
        block_sizes: vec![vec![1], vec![1]],
        defective: false,
        coalescence_gap: gap,
        tolerance: tol,
    }
}

/// Single-linkage clusters of `eigs` at distance `radius`.
fn cluster(eigs: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= radius {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut label, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(i);
    }
    groups
}

/// Ranks of `(M - λI)^k` for `k = 0..=kmax`.
fn rank_sequence(m: &DMatrix<Complex64>, lam: Complex64, kmax: usize, tol: f64) -> Vec<usize> {
    let n = m.nrows();
    let shifted = m - DMatrix::<Complex64>::identity(n, n) * lam;
    let base = shifted.singular_values().max().max(f64::MIN_POSITIVE);
    let mut ranks = vec![n];
    let mut power = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=kmax {
        power = &power * &shifted;
        ranks.push(linalg::complex_rank(&power, tol * base.powi(k as i32)));
    }
    ranks
}

fn jordan_general(m: &DMatrix<f64>, tol: f64) -> JordanReport {
    let n = m.nrows();
    let eigs = linalg::eigenvalues(m);
    let mc = linalg::to_complex(m);
    let norm = m.amax().max(f64::MIN_POSITIVE);

    let mut chosen: Option<(Vec<Vec<usize>>, Vec<Complex64>)> = None;
    let mut exponent = 2;
    while exponent <= 7 {
        let radius = 10f64.powi(-exponent) * norm;
        let groups = cluster(&eigs, radius);
        let means: Vec<Complex64> = groups
            .iter()
            .map(|g| {
                if g.iter().all(|&i| eigs[i] == eigs[g[0]]) {
                    eigs[g[0]]
                } else {
                    g.iter().map(|&i| eigs[i]).sum::<Complex64>() / g.len() as f64
                }
            })
            .collect();
        let confirmed = groups.iter().zip(&means).all(|(g, &lam)| {
            g.len() == 1 || {
                let ranks = rank_sequence(&mc, lam, g.len(), tol);
                n - ranks[g.len()] == g.len()
            }
        });
        let last = exponent == 7;
        if confirmed || last {
            chosen = Some((groups, means));
            break;
        }
        exponent += 1;
    }
    let (groups, means) = chosen.expect("clustering ladder always selects a level");

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut block_sizes = Vec::with_capacity(groups.len());
    for (g, &lam) in groups.iter().zip(&means) {
        let mult = g.len();
        let blocks = if mult == 1 {
            vec![1]
        } else {
            let ranks = rank_sequence(&mc, lam, mult, tol);
            // number of blocks of size ≥ k is r_{k-1} - r_k
            let at_least: Vec<usize> = (1..=mult)
                .map(|k| ranks[k - 1].saturating_sub(ranks[k]))
                .collect();
            let mut sizes = Vec::new();
            for k in (1..=mult).rev() {
                let exactly =
                    at_least[k - 1] - at_least.get(k).copied().unwrap_or(0).min(at_least[k - 1]);
                sizes.extend(std::iter::repeat_n(k, exactly));
            }
            if sizes.iter().sum::<usize>() != mult {
                // rank decisions inconsistent with the cluster; report the
                // largest chain the ranks support and pad with singletons
                let largest = sizes.first().copied().unwrap_or(1).min(mult);
                let mut fixed = vec![largest];
                fixed.extend(std::iter::repeat_n(1, mult - largest));
                sizes = fixed;
            }
            sizes
        };
        eigenvalues.push((lam, mult));
        block_sizes.push(blocks);
    }
    let defective = block_sizes.iter().any(|b| b.iter().any(|&s| s >= 2));
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((eigs[i] - eigs[j]).norm());
        }
    }
    JordanReport {
        eigenvalues,
        block_sizes,
        defective,
        coalescence_gap: gap,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveSpectrum {
    pub base_eigenvalues: Vec<Complex64>,
    pub max_total_degree: usize,
    /// `(n, Σ n_j λ_j)` in graded order.
    pub values: Vec<(Vec<usize>, Complex64)>,
}

impl AdditiveSpectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.1).collect()
    }
}

/// All multi-indices of total degree ≤ `k` over `len` slots, graded then lexicographic.
fn multi_indices(len: usize, k: usize) -> Vec<Vec<usize>> {
    fn fill(slot: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[slot] = v;
            fill(slot + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    if len == 0 {
        out.push(Vec::new());
        return out;
    }
    for deg in 0..=k {
        let mut cur = vec![0; len];
        fill(0, deg, &mut cur, &mut out);
    }
    out
}

/// `{Σ n_j λ_j : Σ n_j ≤ max_degree}`, each multi-index exactly once.
pub fn additive_spectrum(eigs: &[Complex64], max_degree: usize) -> AdditiveSpectrum {
    let values = multi_indices(eigs.len(), max_degree)
        .into_iter()
        .map(|n| {
            let v = n
                .iter()
                .zip(eigs)
                .map(|(&k, &l)| l * k as f64)
                .sum::<Complex64>();
            (n, v)
        })
        .collect();
    AdditiveSpectrum {
        base_eigenvalues: eigs.to_vec(),
        max_total_degree: max_degree,
        values,
    }
}

/// Matrix of `(Aᵀξ)·∇_ξ` on homogeneous degree-`ℓ` polynomials in the basis
/// `p_j = ξ₁^{ℓ-j} ξ₂^j`, `j = 0..=ℓ`. Column `j` holds the image of `p_j`.
pub fn drift_restriction_matrix(a: &DMatrix<f64>, degree: usize) -> Result<DMatrix<f64>> {
    linalg::require_shape(a, 2)?;
    let l = degree;
    let mut m = DMatrix::zeros(l + 1, l + 1);
    for j in 0..=l {
        let (pa, pb) = ((l - j) as f64, j as f64);
        m[(j, j)] = pa * a[(0, 0)] + pb * a[(1, 1)];
        if j < l {
            m[(j + 1, j)] = pa * a[(1, 0)];
        }
        if j > 0 {
            m[(j - 1, j)] = pb * a[(0, 1)];
        }
    }
    Ok(m)
}

/// Position of `ξ₁^a ξ₂^b` in the graded basis.
pub fn monomial_index(a: usize, b: usize) -> usize {
    let deg = a + b;
    deg * (deg + 1) / 2 + b
}

/// Number of monomials of total degree ≤ `k` in two variables.
pub fn basis_size(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// One-mode generator `ℒ = -½ξᵀDξ + (Aᵀξ)·∇_ξ + iuᵀξ` on polynomials of total
/// degree ≤ `max_degree`, graded lowest degree first.
///
/// Diffusion and drive raise the degree, so they only fill blocks strictly
/// below the diagonal; truncation drops whatever leaves the space.
pub fn truncated_ou_matrix(g: &GaussianGenerator, max_degree: usize) -> Result<DMatrix<Complex64>> {
    if g.dim() != 2 {
        return Err(Error::InvalidDimension(
            "truncated generator supports one mode only".into(),
        ));
    }
    if max_degree > MAX_OU_DEGREE {
        return Err(Error::TooLarge {
            size: max_degree,
            max: MAX_OU_DEGREE,
        });
    }
    let k = max_degree;
    let size = basis_size(k);
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    let (a, d, u) = (&g.a, &g.d, &g.u);
    let re = |x: f64| Complex64::new(x, 0.0);
    for deg in 0..=k {
        for b in 0..=deg {
            let a_pow = deg - b;
            let col = monomial_index(a_pow, b);
            let (fa, fb) = (a_pow as f64, b as f64);
            m[(col, col)] += re(fa * a[(0, 0)] + fb * a[(1, 1)]);
            if a_pow > 0 {
                m[(monomial_index(a_pow - 1, b + 1), col)] += re(fa * a[(1, 0)]);
            }
            if b > 0 {
                m[(monomial_index(a_pow + 1, b - 1), col)] += re(fb * a[(0, 1)]);
            }
            if deg < k {
                m[(monomial_index(a_pow + 1, b), col)] += Complex64::new(0.0, u[0]);
                m[(monomial_index(a_pow, b + 1), col)] += Complex64::new(0.0, u[1]);
            }
            if deg + 2 <= k {
                let d12 = 0.5 * (d[(0, 1)] + d[(1, 0)]);
                m[(monomial_index(a_pow + 2, b), col)] += re(-0.5 * d[(0, 0)]);
                m[(monomial_index(a_pow + 1, b + 1), col)] += re(-d12);
                m[(monomial_index(a_pow, b + 2), col)] += re(-0.5 * d[(1, 1)]);
            }
        }
    }
    Ok(m)
}

/// The diagonal block of a graded matrix belonging to homogeneous degree `deg`.
pub fn degree_block<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, deg: usize) -> DMatrix<T> {
    let start = monomial_index(deg, 0);
    m.view((start, start), (deg + 1, deg + 1)).into_owned()
}

/// Spectrum of a graded matrix that is block lower triangular by degree, as
/// the union of its diagonal degree blocks.
///
/// Deflating first keeps rounding in one block from leaking into the
/// clusters of another, which a dense QR on the whole matrix cannot avoid
/// once the drift is close to defective. Fails unless every entry above the
/// diagonal blocks is exactly zero.
pub fn graded_spectrum(m: &DMatrix<Complex64>, max_degree: usize) -> Result<Vec<Complex64>> {
    let size = basis_size(max_degree);
    if m.nrows() != size || m.ncols() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: m.nrows(),
        });
    }
    for col in 0..size {
        let col_deg = degree_of(col);
        for row in 0..monomial_index(col_deg, 0) {
            if m[(row, col)] != Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "entry ({row}, {col}) lies above the diagonal degree blocks"
                )));
            }
        }
    }
    let mut eigs = Vec::with_capacity(size);
    for deg in 0..=max_degree {
        eigs.extend(linalg::complex_eigenvalues(&degree_block(m, deg)));
    }
    Ok(eigs)
}

fn degree_of(index: usize) -> usize {
    let mut deg = 0;
    while monomial_index(deg + 1, 0) <= index {
        deg += 1;
    }
    deg
}
