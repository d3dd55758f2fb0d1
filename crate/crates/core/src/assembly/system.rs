use rayon::prelude::*;

use crate::geometry::Point2;
use crate::mesh::FittedMesh;
use crate::solver::CsrMatrix;

use super::local::{cell_load, load_rule, local_basis, local_stiffness, LocalMatrix};
use super::{AssemblyError, DofMap};

/// The reduced system on the interior degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

struct CellContribution {
    dofs: Vec<Option<usize>>,
    stiffness: LocalMatrix,
    load: Vec<f64>,
}

/// Element contributions are computed in parallel, then merged in cell order.
pub fn assemble_system(
    fm: &FittedMesh,
    dm: &DofMap,
    beta1: f64,
    beta2: f64,
    f: &(dyn Fn(Point2) -> f64 + Sync),
) -> Result<SparseSystem, AssemblyError> {
    let rule = load_rule();
    let parts: Vec<CellContribution> = (0..fm.cells.len())
        .into_par_iter()
        .map(|c| {
            let basis = local_basis(fm, c)?;
            Ok(CellContribution {
                dofs: dm.local_dofs(fm, c),
                stiffness: local_stiffness(&basis, beta1, beta2),
                load: cell_load(&basis, f, &rule),
            })
        })
        .collect::<Result<_, AssemblyError>>()?;

    let mut triplets = Vec::with_capacity(parts.len() * 9);
    let mut rhs = vec![0.0; dm.n_dofs];
    for part in &parts {
        for (i, gi) in part.dofs.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            rhs[gi] += part.load[i];
            for (j, gj) in part.dofs.iter().enumerate() {
                if let Some(gj) = *gj {
                    triplets.push((gi, gj, part.stiffness[(i, j)]));
                }
            }
        }
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(dm.n_dofs, dm.n_dofs, triplets),
        rhs,
    })
}

/// Right-hand side produced by prescribing boundary midpoint values `g` (test hook for patch
/// tests; the shipped problems are homogeneous).
pub fn boundary_lift_rhs(
    fm: &FittedMesh,
    dm: &DofMap,
    beta1: f64,
    beta2: f64,
    g: &(dyn Fn(Point2) -> f64 + Sync),
) -> Result<Vec<f64>, AssemblyError> {
    let mut rhs = vec![0.0; dm.n_dofs];
    for c in 0..fm.cells.len() {
        let dofs = dm.local_dofs(fm, c);
        if dofs.iter().all(Option::is_some) {
            continue;
        }
        let k = local_stiffness(&local_basis(fm, c)?, beta1, beta2);
        let edges = &fm.cell_edges[c];
        for (i, gi) in dofs.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            for (j, gj) in dofs.iter().enumerate() {
                if gj.is_none() {
                    rhs[gi] -= k[(i, j)] * g(fm.edge_midpoint(edges[j]));
                }
            }
        }
    }
    Ok(rhs)
}
