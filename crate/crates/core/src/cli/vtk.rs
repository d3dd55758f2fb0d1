use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::DiscreteField;
use crate::mesh::{Cell, FittedMesh, TRI_SUBCELL};

use super::CliError;

/// `cell_kind` codes written to the VTK file.
pub const KIND_PLAIN: u8 = 0;
pub const KIND_MACRO_TRI: u8 = 1;
pub const KIND_MACRO_QUAD: u8 = 2;

/// Legacy ASCII unstructured grid, one VTK cell per sub-cell with its own copy of the
/// points, so a discontinuous field can be attached as point data.
pub fn format_vtk(fm: &FittedMesh, field: Option<&DiscreteField>) -> String {
    let mut polys = Vec::new();
    for (c, cell) in fm.cells.iter().enumerate() {
        for (k, (verts, side)) in cell.subcells().into_iter().enumerate() {
            let kind = match cell {
                Cell::Plain(_) => KIND_PLAIN,
                Cell::Macro(_) if k == TRI_SUBCELL => KIND_MACRO_TRI,
                Cell::Macro(_) => KIND_MACRO_QUAD,
            };
            polys.push((c, k, fm.polygon(&verts), side.index(), kind));
        }
    }
    let n_points: usize = polys.iter().map(|p| p.2.len()).sum();

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "fitted mesh n={}", fm.n);
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n_points} double");
    for (_, _, poly, _, _) in &polys {
        for p in poly {
            let _ = writeln!(out, "{:.17e} {:.17e} 0", p.x, p.y);
        }
    }
    let _ = writeln!(out, "CELLS {} {}", polys.len(), polys.len() + n_points);
    let mut next = 0;
    for (_, _, poly, _, _) in &polys {
        let _ = write!(out, "{}", poly.len());
        for _ in poly {
            let _ = write!(out, " {next}");
            next += 1;
        }
        out.push('\n');
    }
    let _ = writeln!(out, "CELL_TYPES {}", polys.len());
    for (_, _, poly, _, _) in &polys {
        let _ = writeln!(out, "{}", if poly.len() == 3 { 5 } else { 9 });
    }
    if let Some(field) = field {
        let _ = writeln!(out, "POINT_DATA {n_points}");
        out.push_str("SCALARS u_h double 1\nLOOKUP_TABLE default\n");
        for (c, k, poly, _, _) in &polys {
            for p in poly {
                let _ = writeln!(out, "{:.17e}", field.eval(*c, *k, *p));
            }
        }
    }
    let _ = writeln!(out, "CELL_DATA {}", polys.len());
    out.push_str("SCALARS subdomain int 1\nLOOKUP_TABLE default\n");
    for p in &polys {
        let _ = writeln!(out, "{}", p.3);
    }
    out.push_str("SCALARS cell_kind int 1\nLOOKUP_TABLE default\n");
    for p in &polys {
        let _ = writeln!(out, "{}", p.4);
    }
    out
}

pub fn export_vtk(fm: &FittedMesh, field: Option<&DiscreteField>, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, format_vtk(fm, field)).map_err(|e| CliError::io(path, e))
}
