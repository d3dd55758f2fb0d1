//! Batch driver: configuration, convergence sweeps, CSV and VTK output.

mod config;
mod csv;
mod driver;
mod vtk;

pub use config::{ConfigError, RunConfig};
pub use csv::{export_csv, format_csv, CSV_HEADER};
pub use driver::{problem, run_convergence, run_levels, solve_level, solver_budget, ConvergenceTable, LevelSolution};
pub use vtk::{export_vtk, format_vtk, KIND_MACRO_QUAD, KIND_MACRO_TRI, KIND_PLAIN};

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("level n={n}: {message}")]
    Numerical { n: usize, message: String },
    #[error("convergence table is empty")]
    EmptyTable,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn numerical(n: usize, e: impl std::fmt::Display) -> Self {
        CliError::Numerical {
            n,
            message: e.to_string(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration problems, 1 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ncfem",
    version,
    about = "Convergence sweeps for the circular interface problem",
    allow_negative_numbers = true
)]
pub struct Args {
    /// key=value configuration file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    /// comma-separated background resolutions, e.g. 16,32,64
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub snap_tol: Option<f64>,
    #[arg(long)]
    pub solver_tol: Option<f64>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// also write one VTK file per level
    #[arg(long)]
    pub vtk: bool,
}

impl Args {
    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.beta1 {
            cfg.beta1 = v;
        }
        if let Some(v) = self.beta2 {
            cfg.beta2 = v;
        }
        if let Some(v) = &self.levels {
            cfg.set("levels", v)?;
        }
        if let Some(v) = self.snap_tol {
            cfg.snap_tol = v;
        }
        if let Some(v) = self.solver_tol {
            cfg.solver_tol = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if self.vtk {
            cfg.emit_vtk = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the sweep and writes `convergence.csv` (plus `solution_n{n}.vtk` per level when
/// requested) into the output directory.
pub fn run(cfg: &RunConfig) -> Result<ConvergenceTable, CliError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let table = run_levels(cfg, |level| {
        if cfg.emit_vtk {
            let path = dir.join(format!("solution_n{}.vtk", level.mesh.n));
            export_vtk(&level.mesh, Some(&level.field()?), &path)?;
        }
        Ok(())
    })?;
    export_csv(&table, &dir.join("convergence.csv"))?;
    Ok(table)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = args.to_config().map_err(CliError::from).and_then(|cfg| run(&cfg));
    match result {
        Ok(table) => {
            match format_csv(&table) {
                Ok(text) => print!("{text}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
