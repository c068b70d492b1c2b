//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use driftgauge::linalg::{complex_eigenvalues, eigenvalues, multiset_distance};
use driftgauge::matrix_equations::{
    lyapunov_residual, solve_lyapunov_2x2, solve_lyapunov_kronecker, solve_stein_2x2,
    solve_stein_kronecker, stein_residual,
};
use driftgauge::phase_space::{cp_check_det, cp_check_hermitian};
use driftgauge::sampling::{
    random_dim, random_hurwitz, random_psd, random_schur_stable, uniform_matrix, uniform_vector,
};
use driftgauge::{
    drift_restriction_matrix, gauge_channel, gauge_semigroup, graded_spectrum, jordan_structure,
    nm_channel, nm_ep_gauge, solve_lyapunov, solve_stein, squeezed_ep_gauge, squeezed_generator,
    stein_series, truncated_ou_matrix, Complex64, DMatrix, DVector, DiffusionModel, EpBranch,
    GaussianChannel, GaussianGenerator, NmFamilyParams, SqueezedReservoirParams,
};
use driftgauge_cli::app::run_with;
use driftgauge_cli::SweepTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(
        0.0,
        |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) },
    )
}

fn c1_residuals() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut lyap = 0.0f64;
    let mut stein = 0.0f64;
    let mut agree = 0.0f64;
    for _ in 0..1000 {
        let n = random_dim(&mut r, 3);
        let a = random_hurwitz(&mut r, n);
        let d = random_psd(&mut r, n);
        let s = solve_lyapunov(&a, &d).expect("lyapunov");
        lyap = lyap.max(lyapunov_residual(&a, &s.s, &d) / (1.0 + d.amax()));

        let n = random_dim(&mut r, 3);
        let x = random_schur_stable(&mut r, n);
        let y = random_psd(&mut r, n);
        let s = solve_stein(&x, &y).expect("stein");
        stein = stein.max(stein_residual(&x, &s.s, &y) / (1.0 + y.amax()));
    }
    for _ in 0..1000 {
        let a = random_hurwitz(&mut r, 2);
        let x = random_schur_stable(&mut r, 2);
        let d = random_psd(&mut r, 2);
        let l = (&solve_lyapunov_2x2(&a, &d).unwrap().s
            - &solve_lyapunov_kronecker(&a, &d).unwrap().s)
            .amax();
        let s = (&solve_stein_2x2(&x, &d).unwrap().s - &solve_stein_kronecker(&x, &d).unwrap().s)
            .amax();
        agree = agree.max(l).max(s);
    }
    let took = start.elapsed();
    let pass = lyap <= 1e-10 && stein <= 1e-10 && agree <= 1e-11 && took < Duration::from_secs(10);
    Outcome::new(
        pass,
        format!(
            "Lyapunov/Stein residuals: lyap {lyap:.2e}, stein {stein:.2e} (≤ 1e-10 rel.), 2x2 vs Kronecker {agree:.2e} (≤ 1e-11), {:.2} s (< 10 s)",
            secs(took)
        ),
    )
}

fn c2_uniform_gauge() -> Outcome {
    let start = Instant::now();
    let mut r = rng(202);
    let mut worst = 0.0f64;
    let mut times = 0;
    for _ in 0..200 {
        let n = random_dim(&mut r, 3);
        let g = GaussianGenerator::new(
            random_hurwitz(&mut r, n),
            random_psd(&mut r, n),
            DVector::zeros(n),
        )
        .unwrap();
        let res = gauge_semigroup(&g, None).expect("semigroup gauge");
        times += res.residuals.len();
        worst = worst.max(res.max_residual);
    }
    let took = start.elapsed();
    let pass = worst <= 1e-8 && times == 200 * 20 && took < Duration::from_secs(30);
    Outcome::new(
        pass,
        format!("Uniform-in-time Lyapunov gauge: worst Y_t {worst:.2e} (≤ 1e-8) over {times} (generator, time) pairs, {:.2} s (< 30 s)", secs(took)),
    )
}

fn c3_discrete_gauge() -> Outcome {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    let mut changed = 0;
    for _ in 0..1000 {
        let n = random_dim(&mut r, 3);
        let ch = GaussianChannel::new(
            random_schur_stable(&mut r, n),
            random_psd(&mut r, n),
            uniform_vector(&mut r, n, 1.0),
        )
        .unwrap();
        let g = gauge_channel(&ch).expect("stein gauge");
        worst = worst.max(g.gauged.y.amax());
        let x_same = driftgauge::gauging::bitwise_equal(&g.gauged.x, &ch.x);
        let d_same = g
            .gauged
            .delta
            .iter()
            .zip(ch.delta.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        if !(x_same && d_same) {
            changed += 1;
        }
    }
    Outcome::new(
        worst <= 1e-9 && changed == 0,
        format!("Stein gauge gives (X, 0, δ): worst |Y| {worst:.2e} (≤ 1e-9), X/δ changed in {changed} of 1000"),
    )
}

fn c4_ep_closed_forms() -> Outcome {
    let mut r = rng(404);
    let mut worst_abs = 0.0f64;
    let mut worst_rel = 0.0f64;
    for i in 0..1000 {
        let p = SqueezedReservoirParams {
            kappa: r.random_range(0.05..4.0),
            delta: 0.0,
            epsilon: r.random_range(-3.0..3.0),
            r: r.random_range(0.0..1.5),
            phi: r.random_range(0.0..std::f64::consts::TAU),
        };
        let branch = if i % 2 == 0 {
            EpBranch::Plus
        } else {
            EpBranch::Minus
        };
        let closed = squeezed_ep_gauge(&p, branch).expect("closed form");
        let g = squeezed_generator(&p.on_branch(branch)).unwrap();
        let solved = solve_lyapunov(&g.a, &g.d).expect("solver");
        let diff = (&closed.s - &solved.s).amax();
        worst_abs = worst_abs.max(diff);
        worst_rel = worst_rel.max(diff / (1.0 + solved.s.amax()));
    }
    let p = SqueezedReservoirParams {
        kappa: 2.0,
        delta: 0.0,
        epsilon: 1.0,
        r: 0.0,
        phi: 0.0,
    };
    let s = squeezed_ep_gauge(&p, EpBranch::Plus).unwrap().s;
    let frozen = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 1.5]);
    let exact = s == frozen;
    Outcome::new(
        worst_abs <= 1e-10 && exact,
        format!("EP-branch closed forms vs solve_lyapunov: {worst_abs:.2e} (≤ 1e-10) on 1000 draws; r=0, κ=2, ε=1 reproduces [[0.5,-0.5],[-0.5,1.5]]: {exact}"),
    )
    .detail(format!("relative to 1 + |S|: {worst_rel:.2e}"))
}

fn c5_jordan_closed_form() -> Outcome {
    let mut r = rng(505);
    let mut vs_series = 0.0f64;
    let mut vs_stein = 0.0f64;
    let mut done = [0usize; 3];
    let mut skipped = 0;
    while done.iter().sum::<usize>() < 1000 {
        let which = done.iter().sum::<usize>() % 3;
        let model = match which {
            0 => DiffusionModel::Isotropic,
            1 => DiffusionModel::Anisotropic {
                s: r.random_range(-1.0..1.0),
            },
            _ => DiffusionModel::DriftAligned {
                alpha: r.random_range(0.2..2.0),
            },
        };
        let gamma = r.random_range(0.5..2.0);
        let nu = r.random_range(0.5..2.0);
        let omega = r.random_range(0.05..1.5) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = NmFamilyParams {
            lambda: 0.0,
            omega,
            gamma,
            r_mem: r.random_range(0.05..0.95) * gamma / nu,
            nu,
            model,
            eps_buf: 1e-3,
        };
        let t = r.random_range(0.2..3.0);
        let branch = if r.random_bool(0.5) {
            EpBranch::Plus
        } else {
            EpBranch::Minus
        };
        let closed = match nm_ep_gauge(&p, t, branch) {
            Ok(s) => s,
            Err(driftgauge::Error::Unstable { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let ch = nm_channel(&p.on_branch(branch), t).unwrap();
        let series = stein_series(&ch.x, &ch.y, 1e-16).expect("series");
        let direct = solve_stein(&ch.x, &ch.y).expect("stein");
        vs_series = vs_series.max((&closed.s - &series.s).amax());
        vs_stein = vs_stein.max((&closed.s - &direct.s).amax());
        done[which] += 1;
    }
    Outcome::new(
        vs_series <= 1e-9 && vs_stein <= 1e-10,
        format!("Jordan closed form on λ = ±ω: vs series {vs_series:.2e} (≤ 1e-9), vs solve_stein {vs_stein:.2e} (≤ 1e-10), {done:?} samples per model"),
    )
    .detail(format!("{skipped} draws with κ(t) ≥ 1 redrawn"))
}

fn c6_noise_independence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(606);
    let mut worst = 0.0f64;
    // dense QR on the whole matrix, reported for comparison only
    let mut dense = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = GaussianGenerator::new(
            random_hurwitz(&mut r, 2),
            random_psd(&mut r, 2),
            uniform_vector(&mut r, 2, 1.0),
        )
        .unwrap();
        let quiet = GaussianGenerator {
            d: DMatrix::zeros(2, 2),
            ..g.clone()
        };
        let e = eigenvalues(&g.a);
        for k in 1..=8 {
            let (m, q) = (
                truncated_ou_matrix(&g, k).unwrap(),
                truncated_ou_matrix(&quiet, k).unwrap(),
            );
            let a = graded_spectrum(&m, k).expect("block triangular");
            let b = graded_spectrum(&q, k).expect("block triangular");
            worst = worst.max(multiset_distance(&a, &b).unwrap_or(f64::INFINITY));
            let d = multiset_distance(&complex_eigenvalues(&m), &complex_eigenvalues(&q))
                .unwrap_or(f64::INFINITY);
            if d > dense.0 {
                dense = (d, (e[0] - e[1]).norm());
            }
        }
    }
    let took = start.elapsed();
    Outcome::new(
        worst <= 1e-9 && took < Duration::from_secs(20),
        format!("Truncated OU spectrum with and without D: worst {worst:.2e} (≤ 1e-9), degrees 1..=8, 100 generators, {:.2} s (< 20 s)", secs(took)),
    )
    .detail(format!(
        "dense QR without deflation: worst {:.2e}, at a drift with eigenvalue gap {:.3}",
        dense.0, dense.1
    ))
}

fn c7_jordan_chain() -> Outcome {
    let mut r = rng(707);
    let mut bad = Vec::new();
    for case in 0..20 {
        let lambda = r.random_range(-2.0..-0.1);
        let c = r.random_range(0.1..2.0) * if case % 2 == 0 { 1.0 } else { -1.0 };
        let a = if case % 4 < 2 {
            DMatrix::from_row_slice(2, 2, &[lambda, c, 0.0, lambda])
        } else {
            DMatrix::from_row_slice(2, 2, &[lambda, 0.0, c, lambda])
        };
        for l in 1..=6usize {
            let rep = jordan_structure(&drift_restriction_matrix(&a, l).unwrap(), 1e-10).unwrap();
            let target = Complex64::new(l as f64 * lambda, 0.0);
            let ok = rep.eigenvalues.len() == 1
                && (rep.eigenvalues[0].0 - target).norm() <= 1e-9
                && rep.block_sizes[0] == [l + 1];
            if !ok {
                bad.push((case, l, rep.block_sizes.clone()));
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("Jordan chains: degree-ℓ restriction has one block of size ℓ+1 at ℓλ for ℓ = 1..=6 on 20 drifts, {} failures", bad.len()),
    )
}

fn c8_cp_equivalence() -> Outcome {
    let mut r = rng(808);
    let mut outside = 0;
    let mut inside = 0;
    for _ in 0..10_000 {
        let x = uniform_matrix(&mut r, 2, 2, 1.5);
        // scale Y so det Y straddles α²
        let alpha = driftgauge::phase_space::det_alpha(&x);
        let mut y = random_psd(&mut r, 2);
        let det = y.determinant();
        if det > 1e-12 {
            y *= alpha.abs() / det.sqrt() * r.random_range(0.5..1.5);
        }
        let ch = GaussianChannel::new(x, y, DVector::zeros(2)).unwrap();
        let h = cp_check_hermitian(&ch);
        let d = cp_check_det(&ch).unwrap();
        if h.passes != d.passes {
            if h.margin.abs() <= 1e-10 || d.margin.abs() <= 1e-10 {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    Outcome::new(
        outside == 0,
        format!("CP det condition ⇔ Hermitian PSD on 10^4 one-mode channels: {outside} disagreements outside the ±1e-10 band"),
    )
    .detail(format!("{inside} disagreements inside the band (reported only)"))
}

fn c9_sqrt_coalescence() -> Outcome {
    let (kappa, epsilon) = (2.0, 1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..=40 {
        let dist = 10f64.powf(-6.0 + 4.0 * k as f64 / 40.0);
        for delta in [epsilon - dist, epsilon + dist] {
            let g = squeezed_generator(&SqueezedReservoirParams {
                kappa,
                delta,
                epsilon,
                r: 0.3,
                phi: 0.7,
            })
            .unwrap();
            let e = eigenvalues(&g.a);
            xs.push(dist.ln());
            ys.push((e[0] - e[1]).norm().ln());
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Outcome::new(
        (slope - 0.5).abs() <= 0.02,
        format!("Square-root coalescence: fitted exponent {slope:.5} (0.5 ± 0.02) over |Δ - ε| ∈ [1e-6, 1e-2]"),
    )
}

fn run_cli(args: &[&str]) -> SweepTable {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(
        std::iter::once("driftgauge").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    SweepTable::from_csv(&String::from_utf8(out).unwrap()).unwrap()
}

fn col(t: &SweepTable, name: &str) -> Vec<f64> {
    let c = t.column(name).unwrap();
    t.rows.iter().map(|r| r[c].num().unwrap()).collect()
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

/// Largest Plus/Minus eigenvalue difference per ω of an `nm-branch` table.
fn branch_splits(t: &SweepTable) -> Vec<f64> {
    let l1 = col(t, "lambda_1");
    let l2 = col(t, "lambda_2");
    (0..t.rows.len() / 2)
        .map(|i| {
            (l1[2 * i] - l1[2 * i + 1])
                .abs()
                .max((l2[2 * i] - l2[2 * i + 1]).abs())
        })
        .collect()
}

fn c10_sweeps() -> Outcome {
    let start = Instant::now();
    let mut tables = std::collections::HashMap::new();
    tables.insert("drift", run_cli(&["drift-eigs"]));
    for axis in ["kappa", "r", "phi"] {
        for branch in ["plus", "minus"] {
            let key: &'static str = Box::leak(format!("{axis}-{branch}").into_boxed_str());
            tables.insert(
                key,
                run_cli(&["squeezed-gauge", "--axis", axis, "--branch", branch]),
            );
        }
    }
    for d in ["iso", "aniso", "drift-aligned"] {
        let key: &'static str = Box::leak(format!("surface-{d}").into_boxed_str());
        tables.insert(key, run_cli(&["nm-surface", "--diffusion", d]));
        let key: &'static str = Box::leak(format!("branch-{d}").into_boxed_str());
        tables.insert(key, run_cli(&["nm-branch", "--diffusion", d]));
    }
    let took = start.elapsed();

    let mut claims: Vec<(&str, bool, String)> = Vec::new();
    let kappa_ok = ["kappa-plus", "kappa-minus"].iter().all(|k| {
        nonincreasing(&col(&tables[k], "lambda_1")) && nonincreasing(&col(&tables[k], "lambda_2"))
    });
    claims.push((
        "kappa trend",
        kappa_ok,
        "λ1, λ2 of S nonincreasing in κ on both branches".into(),
    ));
    let r_ok = ["r-plus", "r-minus"].iter().all(|k| {
        nondecreasing(&col(&tables[k], "lambda_1")) && nondecreasing(&col(&tables[k], "lambda_2"))
    });
    claims.push((
        "r trend",
        r_ok,
        "λ1, λ2 of S nondecreasing in r on both branches".into(),
    ));

    let argmax = |t: &SweepTable| {
        let phi = col(t, "phi");
        let l2 = col(t, "lambda_2");
        let i = (0..l2.len()).fold(0, |b, i| if l2[i] > l2[b] { i } else { b });
        phi[i]
    };
    let (pp, pm) = (argmax(&tables["phi-plus"]), argmax(&tables["phi-minus"]));
    let offset = (pp - pm).rem_euclid(std::f64::consts::TAU);
    let step = std::f64::consts::TAU / 72.0;
    let phi_ok = (offset - std::f64::consts::PI).abs() <= 0.5 * step;
    claims.push((
        "phi offset",
        phi_ok,
        format!("argmax φ: plus {pp:.6}, minus {pm:.6}, offset {offset:.6} vs π"),
    ));

    let iso = max_of(branch_splits(&tables["branch-iso"]));
    claims.push((
        "iso branches",
        iso <= 1e-12,
        format!("isotropic Plus/Minus max difference {iso:.2e} (≤ 1e-12)"),
    ));
    let aniso = branch_splits(&tables["branch-aniso"]);
    let drift = branch_splits(&tables["branch-drift-aligned"]);
    let drift_min = drift.iter().cloned().fold(f64::INFINITY, f64::min);
    let split_ok = drift.iter().all(|&d| d > 1e-9);
    claims.push((
        "drift-aligned split",
        split_ok,
        format!(
            "drift-aligned Plus/Minus split > 1e-9 at every ω: min {drift_min:.2e}, max {:.2e} (anisotropic max {:.2e}, for comparison)",
            max_of(drift.iter().cloned()),
            max_of(aniso.iter().cloned())
        ),
    ));
    let fast = took < Duration::from_secs(60);
    claims.push((
        "sweep time",
        fast,
        format!("full default sweep suite in {:.2} s (< 60 s)", secs(took)),
    ));

    let pass = claims.iter().all(|c| c.1);
    let failed: Vec<&str> = claims.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let mut out = Outcome::new(
        pass,
        if pass {
            "Sweep claims on the CLI default grids".to_string()
        } else {
            format!(
                "Sweep claims on the CLI default grids; failing: {}",
                failed.join(", ")
            )
        },
    );
    for (name, ok, text) in claims {
        out = out.detail(format!("[{}] {name}: {text}", if ok { "ok" } else { "no" }));
    }
    out
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1", c1_residuals),
        ("2", c2_uniform_gauge),
        ("3", c3_discrete_gauge),
        ("4", c4_ep_closed_forms),
        ("5", c5_jordan_closed_form),
        ("6", c6_noise_independence),
        ("7", c7_jordan_chain),
        ("8", c8_cp_equivalence),
        ("9", c9_sqrt_coalescence),
        ("10", c10_sweeps),
    ];
    // libtest-style filtering: `cargo test --test acceptance -- 4` runs criterion 4 only
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    let mut ran = 0;
    println!("\nacceptance criteria");
    for (id, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == id) {
            continue;
        }
        ran += 1;
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        println!(
            "{} [{id:>2}] {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.summary
        );
        for d in &outcome.details {
            println!("          {d}");
        }
        if !outcome.pass {
            failures += 1;
        }
    }
    println!(
        "\nacceptance: {} of {ran} criteria passed\n",
        ran - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
