//! The four parameter sweeps. Rows are evaluated in parallel and collected in
//! grid order, so output never depends on scheduling.

use driftgauge::linalg::{max_real_part, spectral_radius};
use driftgauge::{
    cp_check, expm2, jordan_structure, nm_channel, nm_ep_gauge, solve_stein, squeezed_ep_gauge,
    EpBranch, Error, Result,
};
use rayon::prelude::*;

use crate::config::{DiffusionKind, Settings};
use crate::table::{Cell, SweepTable, STATUS_DEGENERATE, STATUS_OK, STATUS_UNSTABLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Kappa,
    R,
    Phi,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Kappa => "kappa",
            Axis::R => "r",
            Axis::Phi => "phi",
        }
    }
}

fn header(settings: &Settings, command: &str, extra: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut meta = vec![
        ("tool".to_string(), "driftgauge".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.to_string()),
    ];
    meta.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    meta.extend(settings.entries());
    meta
}

/// Drift eigenvalues `-κ/2 ± √(ε² - Δ²)` across the detuning grid.
pub fn drift_eigs(settings: &Settings) -> SweepTable {
    let mut table = SweepTable::new(&[
        "delta",
        "re_lambda_plus",
        "re_lambda_minus",
        "im_lambda_plus",
        "im_lambda_minus",
        "gap",
        "ep",
        "status",
    ]);
    table.meta = header(settings, "drift-eigs", &[]);
    let base = settings.squeezed();
    let rows: Vec<Vec<Cell>> = settings
        .delta_grid
        .points()
        .into_par_iter()
        .map(|delta| {
            let p = driftgauge::SqueezedReservoirParams { delta, ..base };
            let [lp, lm] = p.drift_eigenvalues();
            let gap = (lp - lm).norm();
            let status = if max_real_part(&[lp, lm]) < 0.0 {
                STATUS_OK
            } else {
                STATUS_UNSTABLE
            };
            vec![
                delta.into(),
                lp.re.into(),
                lm.re.into(),
                lp.im.into(),
                lm.im.into(),
                gap.into(),
                i64::from(gap < settings.ep_tol).into(),
                status.into(),
            ]
        })
        .collect();
    table.extend(rows);
    table
}

/// Eigenvalues of the EP-branch Lyapunov gauge along one parameter axis.
pub fn squeezed_gauge(settings: &Settings, axis: Axis, branch: EpBranch) -> Result<SweepTable> {
    let mut table = SweepTable::new(&[
        axis.name(),
        "lambda_1",
        "lambda_2",
        "trace",
        "branch",
        "residual",
        "status",
    ]);
    table.meta = header(
        settings,
        "squeezed-gauge",
        &[("axis", axis.name()), ("branch", branch.name())],
    );
    let grid = match axis {
        Axis::Kappa => settings.kappa_grid,
        Axis::R => settings.r_grid,
        Axis::Phi => settings.phi_grid,
    };
    let base = settings.squeezed();
    let rows: Vec<Vec<Cell>> = grid
        .points()
        .into_par_iter()
        .map(|v| {
            let mut p = base;
            match axis {
                Axis::Kappa => p.kappa = v,
                Axis::R => p.r = v,
                Axis::Phi => p.phi = v,
            }
            let s = squeezed_ep_gauge(&p, branch)?;
            let e = s.eigenvalues();
            Ok(vec![
                v.into(),
                e[0].into(),
                e[1].into(),
                s.s.trace().into(),
                branch.name().into(),
                s.residual.into(),
                STATUS_OK.into(),
            ])
        })
        .collect::<Result<_>>()?;
    table.extend(rows);
    Ok(table)
}

/// Overlay marker of a surface row: `0` plain grid, `±1` on `λ = ±ω`.
fn overlay_code(branch: Option<EpBranch>) -> i64 {
    match branch {
        None => 0,
        Some(EpBranch::Plus) => 1,
        Some(EpBranch::Minus) => -1,
    }
}

fn surface_row(
    settings: &Settings,
    kind: DiffusionKind,
    lambda: f64,
    omega: f64,
    overlay: Option<EpBranch>,
) -> Result<Vec<Cell>> {
    let p = settings.nm(kind, lambda, omega);
    let t = settings.t;
    let x = expm2(&p.b(), t) * p.memory_factor(t);
    let spr = spectral_radius(&driftgauge::linalg::eigenvalues(&x));
    let defective = jordan_structure(&x, settings.jordan_tol)?.defective;
    let nan = f64::NAN;
    let mut row: Vec<Cell> = vec![
        lambda.into(),
        omega.into(),
        nan.into(),
        nan.into(),
        i64::from(defective).into(),
    ];
    let ch = match nm_channel(&p, t) {
        Ok(ch) => ch,
        Err(Error::DegenerateModel(_)) => {
            row.extend([
                nan.into(),
                spr.into(),
                overlay_code(overlay).into(),
                STATUS_DEGENERATE.into(),
            ]);
            return Ok(row);
        }
        Err(e) => return Err(e),
    };
    let margin = cp_check(&ch).margin;
    let status = if spr < 1.0 {
        let s = solve_stein(&ch.x, &ch.y)?;
        let e = s.eigenvalues();
        row[2] = e[0].into();
        row[3] = e[1].into();
        STATUS_OK
    } else {
        STATUS_UNSTABLE
    };
    row.extend([
        margin.into(),
        spr.into(),
        overlay_code(overlay).into(),
        status.into(),
    ]);
    Ok(row)
}

/// Eigenvalues of the Stein gauge `S_t` over the `(λ, ω)` plane, followed by
/// overlay rows placed exactly on `λ = ω` and `λ = -ω`.
pub fn nm_surface(settings: &Settings, kind: DiffusionKind) -> Result<SweepTable> {
    let mut table = SweepTable::new(&[
        "lambda",
        "omega",
        "s_min",
        "s_max",
        "defective",
        "cp_margin",
        "spectral_radius",
        "overlay",
        "status",
    ]);
    table.meta = header(settings, "nm-surface", &[("diffusion", kind.name())]);
    let omegas = settings.surface_omega_grid.points();
    let mut points: Vec<(f64, f64, Option<EpBranch>)> = Vec::new();
    for &l in &settings.surface_lambda_grid.points() {
        points.extend(omegas.iter().map(|&w| (l, w, None)));
    }
    for &w in &omegas {
        points.push((w, w, Some(EpBranch::Plus)));
        points.push((-w, w, Some(EpBranch::Minus)));
    }
    let rows: Vec<Vec<Cell>> = points
        .into_par_iter()
        .map(|(l, w, o)| surface_row(settings, kind, l, w, o))
        .collect::<Result<_>>()?;
    table.extend(rows);
    Ok(table)
}

/// Jordan closed-form gauge eigenvalues along both EP lines, one Plus and one
/// Minus row per `ω`.
pub fn nm_branch(settings: &Settings, kind: DiffusionKind) -> Result<SweepTable> {
    let mut table = SweepTable::new(&[
        "omega", "branch", "lambda_1", "lambda_2", "residual", "status",
    ]);
    table.meta = header(settings, "nm-branch", &[("diffusion", kind.name())]);
    let points: Vec<(f64, EpBranch)> = settings
        .branch_omega_grid
        .points()
        .into_iter()
        .flat_map(|w| [(w, EpBranch::Plus), (w, EpBranch::Minus)])
        .collect();
    let rows: Vec<Vec<Cell>> = points
        .into_par_iter()
        .map(|(w, branch)| {
            let p = settings.nm(kind, 0.0, w);
            let nan = f64::NAN;
            let (l1, l2, res, status) = match nm_ep_gauge(&p, settings.t, branch) {
                Ok(s) => {
                    let e = s.eigenvalues();
                    (e[0], e[1], s.residual, STATUS_OK)
                }
                Err(Error::DegenerateModel(_)) => (nan, nan, nan, STATUS_DEGENERATE),
                Err(Error::Unstable { .. }) => (nan, nan, nan, STATUS_UNSTABLE),
                Err(e) => return Err(e),
            };
            Ok(vec![
                w.into(),
                branch.name().into(),
                l1.into(),
                l2.into(),
                res.into(),
                status.into(),
            ])
        })
        .collect::<Result<_>>()?;
    table.extend(rows);
    Ok(table)
}
