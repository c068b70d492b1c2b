//! Seeded invariant suites behind `driftgauge verify`.
//!
//! Inputs are drawn sequentially from one ChaCha stream; evaluation is
//! parallel, and every reduction is a max, so reports are byte-identical for
//! a given seed.

use driftgauge::gauging::bitwise_equal;
use driftgauge::linalg::multiset_distance;
use driftgauge::matrix_equations::{
    lyapunov_residual, solve_lyapunov_2x2, solve_lyapunov_kronecker, solve_stein_2x2,
    solve_stein_kronecker, stein_residual,
};
use driftgauge::models::squeezed_lyapunov;
use driftgauge::phase_space::{cp_check_det, cp_check_hermitian};
use driftgauge::sampling::{
    random_dim, random_hurwitz, random_psd, random_schur_stable, uniform_matrix, uniform_vector,
};
use driftgauge::{
    drift_restriction_matrix, gauge_channel, gauge_semigroup, graded_spectrum, jordan_structure,
    nm_ep_gauge, solve_lyapunov, solve_stein, squeezed_ep_gauge, truncated_ou_matrix, Complex64,
    DMatrix, DVector, EpBranch, GaussianChannel, GaussianGenerator, Result, SmoothingMap,
    SqueezedReservoirParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{DiffusionKind, Settings};
use crate::table::{Cell, SweepTable};

/// Deliberate corruption used to check that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Checks the Stein solution against `Y + 1e-6 I`.
    Stein,
    /// Checks the Lyapunov solution against `D + 1e-6 I`.
    Lyapunov,
    /// Conjugates with `S + 1e-6 I` instead of the Stein solution.
    Gauge,
}

impl Fault {
    pub fn name(self) -> &'static str {
        match self {
            Fault::Stein => "stein",
            Fault::Lyapunov => "lyapunov",
            Fault::Gauge => "gauge",
        }
    }
}

const FAULT_SIZE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// Worst normalized defect over the cases.
    pub max_residual: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN must not hide a failure
    values.into_iter().fold(
        0.0,
        |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) },
    )
}

fn bump(m: &DMatrix<f64>, on: bool) -> DMatrix<f64> {
    if on {
        m + DMatrix::identity(m.nrows(), m.ncols()) * FAULT_SIZE
    } else {
        m.clone()
    }
}

fn lyapunov_suite(rng: &mut ChaCha8Rng, n: usize, fault: Option<Fault>) -> Result<SuiteReport> {
    let cases: Vec<_> = (0..n)
        .map(|_| {
            let d = random_dim(rng, 3);
            (random_hurwitz(rng, d), random_psd(rng, d))
        })
        .collect();
    let on = fault == Some(Fault::Lyapunov);
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|(a, d)| {
            let s = solve_lyapunov(a, d)?;
            Ok(lyapunov_residual(a, &s.s, &bump(d, on)) / (1.0 + d.amax()))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "lyapunov_residual",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-10,
    })
}

fn stein_suite(rng: &mut ChaCha8Rng, n: usize, fault: Option<Fault>) -> Result<SuiteReport> {
    let cases: Vec<_> = (0..n)
        .map(|_| {
            let d = random_dim(rng, 3);
            (random_schur_stable(rng, d), random_psd(rng, d))
        })
        .collect();
    let on = fault == Some(Fault::Stein);
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|(x, y)| {
            let s = solve_stein(x, y)?;
            Ok(stein_residual(x, &s.s, &bump(y, on)) / (1.0 + y.amax()))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "stein_residual",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-10,
    })
}

fn closed_form_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<_> = (0..n)
        .map(|_| {
            (
                random_hurwitz(rng, 2),
                random_schur_stable(rng, 2),
                random_psd(rng, 2),
            )
        })
        .collect();
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|(a, x, d)| {
            let l = solve_lyapunov_2x2(a, d)?;
            let lk = solve_lyapunov_kronecker(a, d)?;
            let s = solve_stein_2x2(x, d)?;
            let sk = solve_stein_kronecker(x, d)?;
            Ok(((&l.s - &lk.s).amax() / (1.0 + lk.s.amax()))
                .max((&s.s - &sk.s).amax() / (1.0 + sk.s.amax())))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "closed_form_vs_kronecker",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-11,
    })
}

fn gauge_suite(rng: &mut ChaCha8Rng, n: usize, fault: Option<Fault>) -> Result<SuiteReport> {
    let cases: Vec<GaussianChannel> = (0..n)
        .map(|_| {
            let d = random_dim(rng, 3);
            let x = random_schur_stable(rng, d);
            let y = random_psd(rng, d);
            let delta = uniform_vector(rng, d, 1.0);
            GaussianChannel::new(x, y, delta)
        })
        .collect::<Result<_>>()?;
    let on = fault == Some(Fault::Gauge);
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|ch| {
            let gauged = if on {
                let s = solve_stein(&ch.x, &ch.y)?;
                SmoothingMap::new(bump(&s.s, true))?.conjugate(ch)?
            } else {
                gauge_channel(ch)?.gauged
            };
            let intact = bitwise_equal(&gauged.x, &ch.x)
                && gauged
                    .delta
                    .iter()
                    .zip(ch.delta.iter())
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            Ok(if intact {
                gauged.y.amax() / (1.0 + ch.y.amax())
            } else {
                f64::INFINITY
            })
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "stein_gauging",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-9,
    })
}

fn semigroup_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<GaussianGenerator> = (0..n)
        .map(|_| {
            let d = random_dim(rng, 3);
            GaussianGenerator::new(
                random_hurwitz(rng, d),
                random_psd(rng, d),
                DVector::zeros(d),
            )
        })
        .collect::<Result<_>>()?;
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|g| gauge_semigroup(g, None).map(|r| r.max_residual))
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "lyapunov_gauging",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-8,
    })
}

/// Counts verdict disagreements outside the `±1e-10` margin band.
fn cp_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<GaussianChannel> = (0..n)
        .map(|_| {
            let x = uniform_matrix(rng, 2, 2, 1.5);
            let y = random_psd(rng, 2) * rng.random_range(0.0..1.5);
            GaussianChannel::new(x, y, DVector::zeros(2))
        })
        .collect::<Result<_>>()?;
    let disagreements: Vec<f64> = cases
        .par_iter()
        .map(|ch| {
            let h = cp_check_hermitian(ch);
            let d = cp_check_det(ch)?;
            let banded = h.margin.abs() <= 1e-10 || d.margin.abs() <= 1e-10;
            Ok(if !banded && h.passes != d.passes {
                1.0
            } else {
                0.0
            })
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "cp_equivalence",
        cases: n,
        max_residual: disagreements.iter().sum(),
        tolerance: 0.0,
    })
}

fn ep_branch_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<(SqueezedReservoirParams, EpBranch)> = (0..n)
        .map(|i| {
            let p = SqueezedReservoirParams {
                kappa: rng.random_range(0.05..4.0),
                delta: 0.0,
                epsilon: rng.random_range(-3.0..3.0),
                r: rng.random_range(0.0..1.5),
                phi: rng.random_range(0.0..std::f64::consts::TAU),
            };
            (
                p,
                if i % 2 == 0 {
                    EpBranch::Plus
                } else {
                    EpBranch::Minus
                },
            )
        })
        .collect();
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|(p, b)| {
            let closed = squeezed_ep_gauge(p, *b)?;
            let solved = squeezed_lyapunov(&p.on_branch(*b))?;
            Ok((&closed.s - &solved.s).amax() / (1.0 + solved.s.amax()))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "ep_branch_closed_form",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-10,
    })
}

fn jordan_closed_form_suite(
    rng: &mut ChaCha8Rng,
    n: usize,
    settings: &Settings,
) -> Result<SuiteReport> {
    let kinds = [
        DiffusionKind::Iso,
        DiffusionKind::Aniso,
        DiffusionKind::DriftAligned,
    ];
    let cases: Vec<_> = (0..n)
        .map(|i| {
            let omega = rng.random_range(0.05..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let t = rng.random_range(0.2..3.0);
            let branch = if rng.random_bool(0.5) {
                EpBranch::Plus
            } else {
                EpBranch::Minus
            };
            (settings.nm(kinds[i % 3], 0.0, omega), t, branch)
        })
        .collect();
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|(p, t, branch)| {
            let closed = match nm_ep_gauge(p, *t, *branch) {
                Ok(s) => s,
                // κ(t) ≥ 1 at early times leaves nothing to compare
                Err(driftgauge::Error::Unstable { .. }) => return Ok(0.0),
                Err(e) => return Err(e),
            };
            let ch = driftgauge::nm_channel(&p.on_branch(*branch), *t)?;
            let solved = solve_stein(&ch.x, &ch.y)?;
            Ok((&closed.s - &solved.s).amax() / (1.0 + solved.s.amax()))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "jordan_closed_form",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-10,
    })
}

fn noise_independence_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<GaussianGenerator> = (0..n)
        .map(|_| {
            GaussianGenerator::new(
                random_hurwitz(rng, 2),
                random_psd(rng, 2),
                uniform_vector(rng, 2, 1.0),
            )
        })
        .collect::<Result<_>>()?;
    let defects: Vec<f64> = cases
        .par_iter()
        .map(|g| {
            let noisy = graded_spectrum(&truncated_ou_matrix(g, 8)?, 8)?;
            let quiet = GaussianGenerator {
                d: DMatrix::zeros(2, 2),
                ..g.clone()
            };
            let clean = graded_spectrum(&truncated_ou_matrix(&quiet, 8)?, 8)?;
            Ok(multiset_distance(&noisy, &clean).unwrap_or(f64::INFINITY))
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "noise_independence",
        cases: n,
        max_residual: worst(defects),
        tolerance: 1e-9,
    })
}

/// Number of restriction degrees whose Jordan data break the chain law.
fn jordan_chain_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<SuiteReport> {
    let cases: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(-2.0..-0.1), rng.random_range(0.1..2.0)))
        .collect();
    let failures: Vec<f64> = cases
        .par_iter()
        .map(|&(lambda, c)| {
            let a = DMatrix::from_row_slice(2, 2, &[lambda, c, 0.0, lambda]);
            let mut bad = 0.0;
            for l in 1..=6 {
                let r = jordan_structure(&drift_restriction_matrix(&a, l)?, 1e-10)?;
                let target = Complex64::new(l as f64 * lambda, 0.0);
                let ok = r.eigenvalues.len() == 1
                    && (r.eigenvalues[0].0 - target).norm() <= 1e-9
                    && r.block_sizes[0] == [l + 1];
                if !ok {
                    bad += 1.0;
                }
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport {
        name: "jordan_chain",
        cases: n,
        max_residual: failures.iter().sum(),
        tolerance: 0.0,
    })
}

/// Runs every suite with `settings.verify_samples` cases (fewer for the
/// costly semigroup and OU suites).
pub fn run(settings: &Settings, fault: Option<Fault>) -> Result<Vec<SuiteReport>> {
    let n = settings.verify_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    Ok(vec![
        lyapunov_suite(&mut rng, n, fault)?,
        stein_suite(&mut rng, n, fault)?,
        closed_form_suite(&mut rng, n)?,
        gauge_suite(&mut rng, n, fault)?,
        semigroup_suite(&mut rng, n.div_ceil(4))?,
        cp_suite(&mut rng, n)?,
        ep_branch_suite(&mut rng, n)?,
        jordan_closed_form_suite(&mut rng, n, settings)?,
        noise_independence_suite(&mut rng, n.div_ceil(4))?,
        jordan_chain_suite(&mut rng, n.div_ceil(10))?,
    ])
}

pub fn report_table(
    settings: &Settings,
    fault: Option<Fault>,
    reports: &[SuiteReport],
) -> SweepTable {
    let mut t = SweepTable::new(&["suite", "cases", "max_residual", "tolerance", "pass"]);
    t.meta = vec![
        ("tool".into(), "driftgauge".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), "verify".into()),
        ("fault".into(), fault.map_or("none", Fault::name).into()),
    ];
    t.meta.extend(settings.entries());
    for r in reports {
        t.push(vec![
            r.name.into(),
            Cell::Int(r.cases as i64),
            r.max_residual.into(),
            r.tolerance.into(),
            Cell::Int(i64::from(r.passed())),
        ]);
    }
    t
}
