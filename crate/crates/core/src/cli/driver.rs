use crate::analysis::{attach_orders, error_norms, DiscreteField, ErrorReport};
use crate::assembly::{assemble_system, build_dofmap, DofMap};
use crate::mesh::{build_background, generate_fitted, FittedMesh, MeshOptions};
use crate::problems::{example1, CircleInterface, ManufacturedProblem};
use crate::solver::{default_max_iter, solve_spd, SolveStats};

use super::{CliError, RunConfig};

/// Rows ordered by decreasing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
}

/// Everything produced at one refinement level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub mesh: FittedMesh,
    pub dofs: DofMap,
    pub coeffs: Vec<f64>,
    pub stats: SolveStats,
    pub report: ErrorReport,
}

impl LevelSolution {
    pub fn field(&self) -> Result<DiscreteField, CliError> {
        DiscreteField::new(&self.mesh, &self.dofs, &self.coeffs).map_err(|e| CliError::numerical(self.mesh.n, e))
    }
}

pub fn problem(cfg: &RunConfig) -> Result<CircleInterface, CliError> {
    example1(cfg.beta1, cfg.beta2).map_err(|e| CliError::Config(super::ConfigError::Invalid(e.to_string())))
}

/// Jacobi-preconditioned CG needs several thousand steps at contrast 1e4, beyond the
/// `20 sqrt(n) + 200` default; `n` steps always suffice in exact arithmetic.
pub fn solver_budget(n_dofs: usize) -> usize {
    n_dofs.max(default_max_iter(n_dofs))
}

/// Mesh, assemble, solve and measure one level. Only `f` enters the solve; the exact
/// solution is used for the error norms alone.
pub fn solve_level(cfg: &RunConfig, n: usize) -> Result<LevelSolution, CliError> {
    let p = problem(cfg)?;
    let num = |e: &dyn std::fmt::Display| CliError::numerical(n, e);
    let bg = build_background(n).map_err(|e| num(&e))?;
    let opts = MeshOptions {
        snap_tol: cfg.snap_tol,
        ..MeshOptions::default()
    };
    let mesh = generate_fitted(&bg, p.levelset(), &opts).map_err(|e| num(&e))?;
    let dofs = build_dofmap(&mesh);
    let sys = assemble_system(&mesh, &dofs, p.beta1, p.beta2, &|q| p.f(q)).map_err(|e| num(&e))?;
    let (coeffs, stats) =
        solve_spd(&sys.matrix, &sys.rhs, cfg.solver_tol, solver_budget(dofs.n_dofs)).map_err(|e| num(&e))?;
    let (err_l2, err_h1) =
        error_norms(&mesh, &dofs, &coeffs, &|q| p.u(q), &|q| p.grad_u(q)).map_err(|e| num(&e))?;
    Ok(LevelSolution {
        report: ErrorReport {
            n,
            h: mesh.h,
            err_l2,
            err_h1,
            order_l2: None,
            order_h1: None,
        },
        mesh,
        dofs,
        coeffs,
        stats,
    })
}

/// Runs the levels in order; `visit` sees each level before it is dropped.
pub fn run_levels<V: FnMut(&LevelSolution) -> Result<(), CliError>>(
    cfg: &RunConfig,
    mut visit: V,
) -> Result<ConvergenceTable, CliError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_levels.len());
    for &n in &cfg.n_levels {
        let level = solve_level(cfg, n)?;
        visit(&level)?;
        rows.push(level.report);
    }
    attach_orders(&mut rows);
    Ok(ConvergenceTable { rows })
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceTable, CliError> {
    run_levels(cfg, |_| Ok(()))
}
