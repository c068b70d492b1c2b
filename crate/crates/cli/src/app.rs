//! Argument parsing and dispatch for the `driftgauge` binary, kept in the
//! library so the exit-code contract can be tested without spawning.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use driftgauge::EpBranch;

use crate::config::{self, ConfigError, DiffusionKind, Settings};
use crate::sweeps;
use crate::table::SweepTable;
use crate::verify;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INVALID_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "driftgauge",
    version,
    about = "Gauge-covariance sweeps for Gaussian drift models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Drift eigenvalues of the squeezed-reservoir mode across the detuning grid.
    DriftEigs,
    /// EP-branch Lyapunov gauge eigenvalues along one parameter axis.
    SqueezedGauge {
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_enum, default_value = "plus")]
        branch: BranchArg,
    },
    /// Stein gauge eigenvalues of the non-Markovian family over the (λ, ω) plane.
    NmSurface {
        #[arg(long, value_enum)]
        diffusion: DiffusionArg,
    },
    /// Jordan closed-form gauge eigenvalues along both EP lines.
    NmBranch {
        #[arg(long, value_enum)]
        diffusion: DiffusionArg,
    },
    /// Run the seeded invariant suites; exit 1 if any fails.
    Verify {
        /// Perturb one solver by 1e-6·I to check that the suite catches it.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
        /// Seed for the sampled cases (overrides the `seed` setting).
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (default csv).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// `key = value` file applied over the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Any settings key, e.g. `--set phi_grid=0:3.14:50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Squeezed model: loss rate κ.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Squeezed model: drive ε (the detuning is placed at ±ε on the EP branches).
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Squeezed model: squeezing strength r.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Squeezed model: squeezing phase φ.
    #[arg(long, global = true)]
    phi: Option<f64>,
    /// Memory factor decay γ.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Memory factor revival amplitude, 0 < r_mem < γ/ν.
    #[arg(long, global = true)]
    r_mem: Option<f64>,
    /// Memory factor revival frequency ν.
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Evaluation time of the non-Markovian channel.
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Positive buffer added to the diffusion scale.
    #[arg(long, global = true)]
    eps_buf: Option<f64>,
    /// Log-anisotropy s of the anisotropic diffusion.
    #[arg(long, global = true)]
    aniso_s: Option<f64>,
    /// Weight α of the drift-aligned diffusion.
    #[arg(long, global = true)]
    alpha: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    Kappa,
    R,
    Phi,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DiffusionArg {
    Iso,
    Aniso,
    DriftAligned,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FaultArg {
    Stein,
    Lyapunov,
    Gauge,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

impl From<DiffusionArg> for DiffusionKind {
    fn from(d: DiffusionArg) -> Self {
        match d {
            DiffusionArg::Iso => DiffusionKind::Iso,
            DiffusionArg::Aniso => DiffusionKind::Aniso,
            DiffusionArg::DriftAligned => DiffusionKind::DriftAligned,
        }
    }
}

/// Defaults, then the config file, then `--set`, then the named flags.
fn resolve(cli: &Cli) -> Result<Settings, ConfigError> {
    let c = &cli.common;
    let mut s = Settings::default();
    if let Some(path) = &c.config {
        s.apply_file(path)?;
    }
    for kv in &c.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: kv.clone(),
            reason: "expected KEY=VALUE".into(),
        })?;
        s.set(k, v)?;
    }
    let flags = [
        (&mut s.kappa, c.kappa),
        (&mut s.epsilon, c.epsilon),
        (&mut s.r, c.r),
        (&mut s.phi, c.phi),
        (&mut s.gamma, c.gamma),
        (&mut s.r_mem, c.r_mem),
        (&mut s.nu, c.nu),
        (&mut s.t, c.t),
        (&mut s.eps_buf, c.eps_buf),
        (&mut s.aniso_s, c.aniso_s),
        (&mut s.alpha, c.alpha),
    ];
    for (slot, value) in flags {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(f) = c.format {
        s.format = match f {
            FormatArg::Csv => config::Format::Csv,
            FormatArg::Json => config::Format::Json,
        };
    }
    if let Command::Verify {
        seed: Some(seed), ..
    } = cli.command
    {
        s.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

fn emit(
    table: &SweepTable,
    settings: &Settings,
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> std::io::Result<()> {
    let text = table.render(settings.format);
    match out {
        Some(path) => std::fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() {
                EXIT_INVALID_CONFIG
            } else {
                EXIT_OK
            };
        }
    };
    let settings = match resolve(&cli) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    let mut failed = false;
    let table = match cli.command {
        Command::DriftEigs => Ok(sweeps::drift_eigs(&settings)),
        Command::SqueezedGauge { axis, branch } => {
            let axis = match axis {
                AxisArg::Kappa => sweeps::Axis::Kappa,
                AxisArg::R => sweeps::Axis::R,
                AxisArg::Phi => sweeps::Axis::Phi,
            };
            let branch = match branch {
                BranchArg::Plus => EpBranch::Plus,
                BranchArg::Minus => EpBranch::Minus,
            };
            sweeps::squeezed_gauge(&settings, axis, branch)
        }
        Command::NmSurface { diffusion } => sweeps::nm_surface(&settings, diffusion.into()),
        Command::NmBranch { diffusion } => sweeps::nm_branch(&settings, diffusion.into()),
        Command::Verify { fault, .. } => {
            let fault = fault.map(|f| match f {
                FaultArg::Stein => verify::Fault::Stein,
                FaultArg::Lyapunov => verify::Fault::Lyapunov,
                FaultArg::Gauge => verify::Fault::Gauge,
            });
            verify::run(&settings, fault).map(|reports| {
                failed = reports.iter().any(|r| !r.passed());
                for r in &reports {
                    let verdict = if r.passed() { "PASS" } else { "FAIL" };
                    let _ = writeln!(
                        stderr,
                        "{verdict} {} ({} cases, max {:.3e} vs {:.1e})",
                        r.name, r.cases, r.max_residual, r.tolerance
                    );
                }
                verify::report_table(&settings, fault, &reports)
            })
        }
    };
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_VERIFY_FAILED;
        }
    };
    if let Err(e) = emit(&table, &settings, cli.common.out.as_ref(), stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_VERIFY_FAILED;
    }
    if failed {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    }
}
