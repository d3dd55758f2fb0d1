//! Interpolation, error norms, weak-continuity probes and convergence orders.

use rayon::prelude::*;
use thiserror::Error;

use crate::assembly::{local_basis, AssemblyError, DofMap};
use crate::element::{quadrature, AffineFn, QuadratureRule};
use crate::geometry::Point2;
use crate::mesh::{Cell, EdgeClass, FittedMesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("coefficient vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub err_l2: f64,
    pub err_h1: f64,
    pub order_l2: Option<f64>,
    pub order_h1: Option<f64>,
}

/// `pi_h v`: every DOF gets the mean of `v` at the endpoints of its edge.
pub fn interpolate_pi_h(fm: &FittedMesh, dm: &DofMap, v: &(dyn Fn(Point2) -> f64 + Sync)) -> Vec<f64> {
    dm.dof_edge
        .iter()
        .map(|&e| {
            let [a, b] = fm.edges[e].vertices;
            0.5 * (v(fm.point(a)) + v(fm.point(b)))
        })
        .collect()
}

/// A discrete function stored as one affine piece per sub-cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub pieces: Vec<Vec<AffineFn>>,
    pub polygons: Vec<Vec<Vec<Point2>>>,
}

impl DiscreteField {
    pub fn new(fm: &FittedMesh, dm: &DofMap, coeffs: &[f64]) -> Result<Self, AnalysisError> {
        if coeffs.len() != dm.n_dofs {
            return Err(AnalysisError::DimensionMismatch {
                got: coeffs.len(),
                expected: dm.n_dofs,
            });
        }
        let per_cell: Vec<(Vec<AffineFn>, Vec<Vec<Point2>>)> = (0..fm.cells.len())
            .into_par_iter()
            .map(|c| {
                let basis = local_basis(fm, c)?;
                let local: Vec<f64> = dm
                    .local_dofs(fm, c)
                    .iter()
                    .map(|d| d.map_or(0.0, |d| coeffs[d]))
                    .collect();
                Ok(basis
                    .subcells
                    .iter()
                    .map(|sub| (sub.combine(&local), sub.polygon.clone()))
                    .unzip())
            })
            .collect::<Result<_, AssemblyError>>()?;
        let (pieces, polygons) = per_cell.into_iter().unzip();
        Ok(Self { pieces, polygons })
    }

    pub fn eval(&self, cell: usize, subcell: usize, p: Point2) -> f64 {
        self.pieces[cell][subcell].eval(p)
    }

    /// Adds `delta` to the constant term of one piece (test hook for breaking continuity).
    pub fn perturb_piece(&mut self, cell: usize, subcell: usize, delta: f64) {
        self.pieces[cell][subcell].c += delta;
    }
}

/// Sum with pairwise splitting so the result does not depend on thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// `(||u - u_h||_0, |u - u_h|_{1,h})` with the degree-4 rule on every fan triangle of every
/// sub-cell. `u` and `grad_u` are evaluated pointwise, so the true interface decides which
/// branch of the exact solution is used.
pub fn error_norms(
    fm: &FittedMesh,
    dm: &DofMap,
    coeffs: &[f64],
    u: &(dyn Fn(Point2) -> f64 + Sync),
    grad_u: &(dyn Fn(Point2) -> [f64; 2] + Sync),
) -> Result<(f64, f64), AnalysisError> {
    error_norms_with(fm, dm, coeffs, u, grad_u, &quadrature(4).expect("degree-4 rule exists"))
}

pub fn error_norms_with(
    fm: &FittedMesh,
    dm: &DofMap,
    coeffs: &[f64],
    u: &(dyn Fn(Point2) -> f64 + Sync),
    grad_u: &(dyn Fn(Point2) -> [f64; 2] + Sync),
    rule: &QuadratureRule,
) -> Result<(f64, f64), AnalysisError> {
    let field = DiscreteField::new(fm, dm, coeffs)?;
    Ok(field_error_norms(&field, u, grad_u, rule))
}

pub fn field_error_norms(
    field: &DiscreteField,
    u: &(dyn Fn(Point2) -> f64 + Sync),
    grad_u: &(dyn Fn(Point2) -> [f64; 2] + Sync),
    rule: &QuadratureRule,
) -> (f64, f64) {
    let parts: Vec<(f64, f64)> = (0..field.pieces.len())
        .into_par_iter()
        .map(|c| {
            let (mut l2, mut h1) = (0.0, 0.0);
            for (piece, poly) in field.pieces[c].iter().zip(&field.polygons[c]) {
                let [gx, gy] = piece.gradient();
                for k in 1..poly.len() - 1 {
                    let tri = [poly[0], poly[k], poly[k + 1]];
                    l2 += rule.integrate(tri, |p| (u(p) - piece.eval(p)).powi(2));
                    h1 += rule.integrate(tri, |p| {
                        let [ux, uy] = grad_u(p);
                        (ux - gx).powi(2) + (uy - gy).powi(2)
                    });
                }
            }
            (l2, h1)
        })
        .collect();
    let (l2, h1): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
    (pairwise_sum(&l2).sqrt(), pairwise_sum(&h1).sqrt())
}

/// `max_e |int_e [v_h] ds| / |e|` over all interior edges, including the cut inside every
/// macro cell. Pieces are affine, so the edge mean is the midpoint value.
pub fn weak_continuity_residual(fm: &FittedMesh, dm: &DofMap, coeffs: &[f64]) -> Result<f64, AnalysisError> {
    Ok(field_continuity_residual(fm, &DiscreteField::new(fm, dm, coeffs)?))
}

pub fn field_continuity_residual(fm: &FittedMesh, field: &DiscreteField) -> f64 {
    fm.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.class != EdgeClass::Boundary)
        .map(|(k, e)| {
            let m = fm.edge_midpoint(k);
            let [i, j] = [&e.incident[0], &e.incident[1]];
            (field.eval(i.cell, i.subcell, m) - field.eval(j.cell, j.subcell, m)).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest jump between the two pieces of a macro cell at the midpoint of its cut.
pub fn macro_cut_jump(fm: &FittedMesh, field: &DiscreteField) -> f64 {
    fm.cells
        .iter()
        .enumerate()
        .filter_map(|(c, cell)| match cell {
            Cell::Macro(m) => {
                let mid = fm.point(m.outer[2]).midpoint(fm.point(m.outer[4]));
                Some((field.eval(c, 0, mid) - field.eval(c, 1, mid)).abs())
            }
            Cell::Plain(_) => None,
        })
        .fold(0.0, f64::max)
}

/// `order_k = log(e_{k-1} / e_k) / log(h_{k-1} / h_k)`, one entry per consecutive pair.
pub fn eoc(errors: &[(f64, f64)]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

/// Fills in the order columns from consecutive rows.
pub fn attach_orders(rows: &mut [ErrorReport]) {
    let l2 = eoc(&rows.iter().map(|r| (r.h, r.err_l2)).collect::<Vec<_>>());
    let h1 = eoc(&rows.iter().map(|r| (r.h, r.err_h1)).collect::<Vec<_>>());
    for (k, row) in rows.iter_mut().enumerate() {
        row.order_l2 = k.checked_sub(1).map(|k| l2[k]);
        row.order_h1 = k.checked_sub(1).map(|k| h1[k]);
    }
}
