use nalgebra::DMatrix;

use crate::element::{crouzeix_raviart_basis, quadrature, reference_macro, AffineFn, QuadratureRule};
use crate::geometry::{polygon_area, Point2, SideTag};
use crate::mesh::{Cell, FittedMesh};

use super::{beta_of, AssemblyError};

pub type LocalMatrix = DMatrix<f64>;

/// Physical affine pieces of every local basis function on one sub-cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcellBasis {
    pub side: SideTag,
    pub polygon: Vec<Point2>,
    pub area: f64,
    pub functions: Vec<AffineFn>,
}

impl SubcellBasis {
    /// Fan triangulation from the first vertex (for a macro quadrilateral this is the
    /// `A1 A3` diagonal).
    pub fn triangles(&self) -> impl Iterator<Item = [Point2; 3]> + '_ {
        let p = &self.polygon;
        (1..p.len() - 1).map(move |k| [p[0], p[k], p[k + 1]])
    }

    /// The affine function `sum_i coeffs[i] * phi_i` on this sub-cell.
    pub fn combine(&self, coeffs: &[f64]) -> AffineFn {
        let mut out = AffineFn::ZERO;
        for (f, &c) in self.functions.iter().zip(coeffs) {
            out.a += c * f.a;
            out.b += c * f.b;
            out.c += c * f.c;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pub subcells: Vec<SubcellBasis>,
}

impl LocalBasis {
    pub fn n_functions(&self) -> usize {
        self.subcells[0].functions.len()
    }
}

/// Local basis of cell `c` pushed forward to physical coordinates.
pub fn local_basis(fm: &FittedMesh, c: usize) -> Result<LocalBasis, AssemblyError> {
    let cell = &fm.cells[c];
    let floor = 1e-16 * fm.h * fm.h;
    let subcell = |verts: &[usize], side: SideTag, functions: Vec<AffineFn>| {
        let polygon = fm.polygon(verts);
        let area = polygon_area(&polygon).abs();
        if !(area > floor) {
            return Err(AssemblyError::DegenerateCell { cell: c, area });
        }
        Ok(SubcellBasis {
            side,
            polygon,
            area,
            functions,
        })
    };
    let subcells = match cell {
        Cell::Plain(p) => {
            let basis = crouzeix_raviart_basis(fm.points(p.vertices))
                .map_err(|source| AssemblyError::Element { cell: c, source })?;
            vec![subcell(&p.vertices, p.side, basis.to_vec())?]
        }
        Cell::Macro(m) => {
            let rm = reference_macro(m.s, m.t)
                .map_err(|source| AssemblyError::Element { cell: c, source })?;
            let quad = rm.quad.iter().map(|&f| m.map.push_forward(f)).collect();
            let tri = rm.tri.iter().map(|&f| m.map.push_forward(f)).collect();
            vec![
                subcell(&m.quad_subcell(), m.quad_side, quad)?,
                subcell(&m.tri_subcell(), m.tri_side, tri)?,
            ]
        }
    };
    Ok(LocalBasis { subcells })
}

/// `K_ij = sum_sub beta_sub |sub| grad phi_i . grad phi_j` (exact: gradients are constant).
pub fn local_stiffness(basis: &LocalBasis, beta1: f64, beta2: f64) -> LocalMatrix {
    let n = basis.n_functions();
    let mut k = DMatrix::zeros(n, n);
    for sub in &basis.subcells {
        let w = beta_of(sub.side, beta1, beta2) * sub.area;
        for i in 0..n {
            let gi = sub.functions[i].gradient();
            for j in i..n {
                let gj = sub.functions[j].gradient();
                let v = w * (gi[0] * gj[0] + gi[1] * gj[1]);
                k[(i, j)] += v;
                if i != j {
                    k[(j, i)] += v;
                }
            }
        }
    }
    k
}

pub fn cell_stiffness(fm: &FittedMesh, c: usize, beta1: f64, beta2: f64) -> Result<LocalMatrix, AssemblyError> {
    Ok(local_stiffness(&local_basis(fm, c)?, beta1, beta2))
}

/// `F_i = int f phi_i` with the given rule on each fan triangle of each sub-cell.
pub fn cell_load(basis: &LocalBasis, f: &(dyn Fn(Point2) -> f64 + Sync), rule: &QuadratureRule) -> Vec<f64> {
    let n = basis.n_functions();
    let mut out = vec![0.0; n];
    for sub in &basis.subcells {
        for tri in sub.triangles() {
            for (i, phi) in sub.functions.iter().enumerate() {
                out[i] += rule.integrate(tri, |p| f(p) * phi.eval(p));
            }
        }
    }
    out
}

pub(crate) fn load_rule() -> QuadratureRule {
    quadrature(2).expect("degree-2 rule exists")
}
