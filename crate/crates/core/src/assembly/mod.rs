//! Degrees of freedom, element matrices and the global system.

mod dofmap;
mod local;
mod system;

pub use dofmap::{build_dofmap, DofMap};
pub use local::{
    cell_load, cell_stiffness, local_basis, local_stiffness, LocalBasis, LocalMatrix, SubcellBasis,
};
pub use system::{assemble_system, boundary_lift_rhs, SparseSystem};

use thiserror::Error;

use crate::element::ElementError;
use crate::geometry::SideTag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("degenerate sub-cell in cell {cell} (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("cell {cell}: {source}")]
    Element {
        cell: usize,
        #[source]
        source: ElementError,
    },
    #[error("coefficient vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// `beta_h` on a sub-cell.
pub fn beta_of(side: SideTag, beta1: f64, beta2: f64) -> f64 {
    match side {
        SideTag::Omega1 => beta1,
        SideTag::Omega2 => beta2,
        SideTag::OnInterface => unreachable!("sub-cells always lie on one side of the interface"),
    }
}
