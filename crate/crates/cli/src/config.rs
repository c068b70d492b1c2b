//! Resolved sweep settings: built-in defaults, then a `key = value` config
//! file, then command-line overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use driftgauge::{DiffusionModel, NmFamilyParams, SqueezedReservoirParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("{path}:{line}: {reason}")]
    Syntax {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Inclusive uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.count < 2 {
            return Err(ConfigError::Invalid(format!(
                "{name}: grid count must be at least 2"
            )));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "{name}: grid needs finite min < max"
            )));
        }
        Ok(())
    }

    /// Endpoints are hit exactly; interior points are `min + (max - min)k/(n - 1)`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.min, self.max, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    /// `min:max:count`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("expected min:max:count".into());
        }
        let min = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
        let max = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
        let count = parts[2].parse::<usize>().map_err(|e| e.to_string())?;
        Ok(Grid { min, max, count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    // squeezed reservoir
    pub kappa: f64,
    pub epsilon: f64,
    pub r: f64,
    pub phi: f64,
    // non-Markovian family
    pub gamma: f64,
    pub r_mem: f64,
    pub nu: f64,
    pub t: f64,
    pub eps_buf: f64,
    pub aniso_s: f64,
    pub alpha: f64,
    // grids
    pub delta_grid: Grid,
    pub kappa_grid: Grid,
    pub r_grid: Grid,
    pub phi_grid: Grid,
    pub branch_omega_grid: Grid,
    pub surface_lambda_grid: Grid,
    pub surface_omega_grid: Grid,
    // tolerances
    /// Drift-eigenvalue gap below which a row is marked as an EP.
    pub ep_tol: f64,
    /// Relative singular-value threshold for Jordan structure.
    pub jordan_tol: f64,
    pub verify_samples: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            kappa: 0.1,
            epsilon: 2.0,
            r: 0.5,
            phi: PI / 2.0,
            gamma: 1.0,
            r_mem: 0.3,
            nu: 1.0,
            t: 1.0,
            eps_buf: 1e-3,
            aniso_s: 0.5,
            alpha: 1.0,
            delta_grid: Grid::new(-4.0, 4.0, 101),
            kappa_grid: Grid::new(0.05, 4.0, 80),
            r_grid: Grid::new(0.0, 1.5, 31),
            phi_grid: Grid::new(0.0, 2.0 * PI, 73),
            branch_omega_grid: Grid::new(-1.5, 1.5, 60),
            surface_lambda_grid: Grid::new(-1.5, 1.5, 61),
            surface_omega_grid: Grid::new(-1.5, 1.5, 61),
            ep_tol: 1e-6,
            jordan_tol: 1e-10,
            verify_samples: 200,
            seed: 1,
            format: Format::Csv,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| ConfigError::BadValue {
            key: key.to_string(),
            reason: e.to_string(),
        })
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        match key {
            "kappa" => self.kappa = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "phi" => self.phi = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "r_mem" => self.r_mem = parse(key, value)?,
            "nu" => self.nu = parse(key, value)?,
            "t" => self.t = parse(key, value)?,
            "eps_buf" => self.eps_buf = parse(key, value)?,
            "aniso_s" => self.aniso_s = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "delta_grid" => self.delta_grid = parse(key, value)?,
            "kappa_grid" => self.kappa_grid = parse(key, value)?,
            "r_grid" => self.r_grid = parse(key, value)?,
            "phi_grid" => self.phi_grid = parse(key, value)?,
            "branch_omega_grid" => self.branch_omega_grid = parse(key, value)?,
            "surface_lambda_grid" => self.surface_lambda_grid = parse(key, value)?,
            "surface_omega_grid" => self.surface_omega_grid = parse(key, value)?,
            "ep_tol" => self.ep_tol = parse(key, value)?,
            "jordan_tol" => self.jordan_tol = parse(key, value)?,
            "verify_samples" => self.verify_samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "format" => self.format = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
                reason: "expected `key = value`".into(),
            })?;
            self.set(key, value).map_err(|e| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Resolved configuration in a fixed key order, values in round-trippable form.
    pub fn entries(&self) -> Vec<(String, String)> {
        let f = |x: f64| format!("{x:?}");
        vec![
            ("kappa".into(), f(self.kappa)),
            ("epsilon".into(), f(self.epsilon)),
            ("r".into(), f(self.r)),
            ("phi".into(), f(self.phi)),
            ("gamma".into(), f(self.gamma)),
            ("r_mem".into(), f(self.r_mem)),
            ("nu".into(), f(self.nu)),
            ("t".into(), f(self.t)),
            ("eps_buf".into(), f(self.eps_buf)),
            ("aniso_s".into(), f(self.aniso_s)),
            ("alpha".into(), f(self.alpha)),
            ("delta_grid".into(), self.delta_grid.to_string()),
            ("kappa_grid".into(), self.kappa_grid.to_string()),
            ("r_grid".into(), self.r_grid.to_string()),
            ("phi_grid".into(), self.phi_grid.to_string()),
            (
                "branch_omega_grid".into(),
                self.branch_omega_grid.to_string(),
            ),
            (
                "surface_lambda_grid".into(),
                self.surface_lambda_grid.to_string(),
            ),
            (
                "surface_omega_grid".into(),
                self.surface_omega_grid.to_string(),
            ),
            ("ep_tol".into(), f(self.ep_tol)),
            ("jordan_tol".into(), f(self.jordan_tol)),
            ("verify_samples".into(), self.verify_samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("format".into(), self.format.to_string()),
        ]
    }

    pub fn squeezed(&self) -> SqueezedReservoirParams {
        SqueezedReservoirParams {
            kappa: self.kappa,
            delta: self.epsilon,
            epsilon: self.epsilon,
            r: self.r,
            phi: self.phi,
        }
    }

    pub fn diffusion(&self, kind: DiffusionKind) -> DiffusionModel {
        match kind {
            DiffusionKind::Iso => DiffusionModel::Isotropic,
            DiffusionKind::Aniso => DiffusionModel::Anisotropic { s: self.aniso_s },
            DiffusionKind::DriftAligned => DiffusionModel::DriftAligned { alpha: self.alpha },
        }
    }

    pub fn nm(&self, kind: DiffusionKind, lambda: f64, omega: f64) -> NmFamilyParams {
        NmFamilyParams {
            lambda,
            omega,
            gamma: self.gamma,
            r_mem: self.r_mem,
            nu: self.nu,
            model: self.diffusion(kind),
            eps_buf: self.eps_buf,
        }
    }

    /// Grid shapes, model ranges and tolerances.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, g) in [
            ("delta_grid", self.delta_grid),
            ("kappa_grid", self.kappa_grid),
            ("r_grid", self.r_grid),
            ("phi_grid", self.phi_grid),
            ("branch_omega_grid", self.branch_omega_grid),
            ("surface_lambda_grid", self.surface_lambda_grid),
            ("surface_omega_grid", self.surface_omega_grid),
        ] {
            g.validate(name)?;
        }
        if !(self.kappa_grid.min > 0.0) {
            return Err(ConfigError::Invalid("kappa_grid must stay positive".into()));
        }
        if !(self.r_grid.min >= 0.0) {
            return Err(ConfigError::Invalid("r_grid must stay non-negative".into()));
        }
        self.squeezed()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for kind in [
            DiffusionKind::Iso,
            DiffusionKind::Aniso,
            DiffusionKind::DriftAligned,
        ] {
            self.nm(kind, 0.0, 1.0)
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(ConfigError::Invalid("t must be positive".into()));
        }
        if !(self.ep_tol > 0.0) || !(self.jordan_tol > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        if self.verify_samples == 0 {
            return Err(ConfigError::Invalid(
                "verify_samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionKind {
    Iso,
    Aniso,
    DriftAligned,
}

impl DiffusionKind {
    pub fn name(self) -> &'static str {
        match self {
            DiffusionKind::Iso => "iso",
            DiffusionKind::Aniso => "aniso",
            DiffusionKind::DriftAligned => "drift-aligned",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        let g = Grid::new(-1.5, 1.5, 61);
        let p = g.points();
        assert_eq!(p[0], -1.5);
        assert_eq!(p[30], 0.0);
        assert_eq!(p[60], 1.5);
        assert_eq!("-1.5:1.5:61".parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn config_text_overrides_defaults() {
        let mut s = Settings::default();
        s.apply_text(
            "# comment\nkappa = 0.5\n\nr_grid = 0:1:11  # trailing\n",
            "inline",
        )
        .unwrap();
        assert_eq!(s.kappa, 0.5);
        assert_eq!(s.r_grid, Grid::new(0.0, 1.0, 11));
        assert_eq!(s.epsilon, 2.0);
        assert!(matches!(
            s.apply_text("kappa 1", "x"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            s.set("nope", "1"),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn entries_round_trip() {
        let s = Settings {
            phi: 0.1 + 0.2,
            ..Settings::default()
        };
        let text: String = s
            .entries()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let mut back = Settings::default();
        back.apply_text(&text, "entries").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let s = Settings {
            r_grid: Grid::new(1.0, 1.0, 5),
            ..Settings::default()
        };
        assert!(s.validate().is_err());
        let mut s = Settings::default();
        s.phi_grid.count = 1;
        assert!(s.validate().is_err());
        let s = Settings {
            r_mem: 2.0,
            ..Settings::default()
        };
        assert!(s.validate().is_err());
        assert!(Settings::default().validate().is_ok());
    }
}
