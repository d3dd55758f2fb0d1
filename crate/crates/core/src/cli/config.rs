use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::DEFAULT_SNAP_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    InvalidValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
}

/// Parameters of one convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub n_levels: Vec<usize>,
    pub snap_tol: f64,
    pub solver_tol: f64,
    pub output_dir: PathBuf,
    pub emit_vtk: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta1: 1.0,
            beta2: 100.0,
            n_levels: vec![16, 32, 64, 128, 256],
            snap_tol: DEFAULT_SNAP_TOL,
            solver_tol: 1e-10,
            output_dir: PathBuf::from("out"),
            emit_vtk: false,
        }
    }
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys match the command-line flag names with
    /// dashes or underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let real = || value.parse::<f64>().map_err(|_| bad());
        match key.replace('-', "_").as_str() {
            "beta1" => self.beta1 = real()?,
            "beta2" => self.beta2 = real()?,
            "levels" | "n_levels" => self.n_levels = parse_levels(value).ok_or_else(bad)?,
            "snap_tol" => self.snap_tol = real()?,
            "solver_tol" => self.solver_tol = real()?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "vtk" | "emit_vtk" => {
                self.emit_vtk = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad()),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses a flat `key=value` file on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: k + 1,
                text: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.beta1 > 0.0 && self.beta2 > 0.0) || !self.beta1.is_finite() || !self.beta2.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "coefficients must be positive and finite, got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if self.n_levels.is_empty() || self.n_levels.contains(&0) {
            return Err(ConfigError::Invalid("at least one positive level is required".into()));
        }
        if self.n_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Invalid("levels must be strictly increasing".into()));
        }
        if !(self.snap_tol > 0.0 && self.solver_tol > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn parse_levels(value: &str) -> Option<Vec<usize>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok())
        .collect()
}
