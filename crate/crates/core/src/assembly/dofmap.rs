use crate::mesh::{EdgeClass, FittedMesh};

/// One unknown per edge midpoint, except on the boundary and on macro-internal cuts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub edge_dof: Vec<Option<usize>>,
    pub dof_edge: Vec<usize>,
    pub n_dofs: usize,
    pub boundary_edges: Vec<usize>,
}

pub fn build_dofmap(fm: &FittedMesh) -> DofMap {
    let mut edge_dof = vec![None; fm.edges.len()];
    let mut dof_edge = Vec::new();
    let mut boundary_edges = Vec::new();
    // fm.edges is sorted by (min endpoint, max endpoint), so numbering follows that order
    for (e, edge) in fm.edges.iter().enumerate() {
        if edge.class == EdgeClass::Boundary {
            boundary_edges.push(e);
        } else if !edge.macro_internal {
            edge_dof[e] = Some(dof_edge.len());
            dof_edge.push(e);
        }
    }
    DofMap {
        edge_dof,
        n_dofs: dof_edge.len(),
        dof_edge,
        boundary_edges,
    }
}

impl DofMap {
    /// Global DOFs of the local basis functions of cell `c` (`None` on boundary edges).
    pub fn local_dofs(&self, fm: &FittedMesh, c: usize) -> Vec<Option<usize>> {
        let n = fm.cells[c].n_local_dofs();
        fm.cell_edges[c][..n].iter().map(|&e| self.edge_dof[e]).collect()
    }
}
