//! Background triangulation and the interface-fitted hybrid mesh.

mod background;
mod fitted;
mod quality;

pub use background::{build_background, BackgroundMesh};
pub use fitted::{generate_fitted, MeshOptions};
pub use quality::{quality_report, QualityReport};

use thiserror::Error;

use crate::element::AffineMap;
use crate::geometry::{polygon_area, GeometryError, Point2, SideTag};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid resolution n = {0} (need n >= 2)")]
    InvalidResolution(usize),
    #[error("background triangle {triangle} admits more than one crossing pattern")]
    AmbiguousCut { triangle: usize },
    #[error("degenerate cut in background triangle {triangle}: s = {s}, t = {t}")]
    DegenerateCut { triangle: usize, s: f64, t: f64 },
    #[error("edge {edge} has {count} incident sub-cells")]
    BrokenIncidence { edge: usize, count: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A triangle carrying a single affine piece (Crouzeix-Raviart element).
#[derive(Debug, Clone, PartialEq)]
pub struct PlainTri {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    pub side: SideTag,
    /// Index of the background triangle this cell lies in.
    pub parent: usize,
    /// True for the two halves of a background triangle cut through a vertex.
    pub from_vertex_cut: bool,
}

/// A background triangle cut through the interiors of two edges.
///
/// `outer = [A1, A2, A3, A4, A5]`: `A4` is the vertex separated by the cut, `A5` lies on
/// `A1 A4` and `A3` on `A2 A4`, labelled so that `t = |A1A5|/|A1A4| >= s = |A2A3|/|A2A4|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroCell {
    pub outer: [usize; 5],
    pub s: f64,
    pub t: f64,
    pub tri_side: SideTag,
    pub quad_side: SideTag,
    /// Sends `(0,0) -> A1`, `(1,0) -> A2`, `(0,1) -> A4`.
    pub map: AffineMap,
    pub parent: usize,
}

impl MacroCell {
    /// `A3 A4 A5`
    pub fn tri_subcell(&self) -> [usize; 3] {
        [self.outer[2], self.outer[3], self.outer[4]]
    }

    /// `A1 A2 A3 A5`
    pub fn quad_subcell(&self) -> [usize; 4] {
        [self.outer[0], self.outer[1], self.outer[2], self.outer[4]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Plain(PlainTri),
    Macro(MacroCell),
}

/// Index of the quadrilateral sub-cell of a macro cell (and the only sub-cell of a plain one).
pub const QUAD_SUBCELL: usize = 0;
/// Index of the triangular sub-cell of a macro cell.
pub const TRI_SUBCELL: usize = 1;
/// Local index of the internal cut edge `A3 A5` of a macro cell.
pub const MACRO_CUT_EDGE: usize = 5;

impl Cell {
    /// Local edges. Plain: edge `k` is opposite vertex `k`. Macro: `A1A2, A2A3, A3A4, A4A5,
    /// A5A1` followed by the cut `A3A5`.
    pub fn local_edges(&self) -> Vec<[usize; 2]> {
        match self {
            Cell::Plain(p) => {
                let v = p.vertices;
                vec![[v[1], v[2]], [v[2], v[0]], [v[0], v[1]]]
            }
            Cell::Macro(m) => {
                let a = m.outer;
                vec![[a[0], a[1]], [a[1], a[2]], [a[2], a[3]], [a[3], a[4]], [a[4], a[0]], [a[2], a[4]]]
            }
        }
    }

    /// Number of local degrees of freedom (3 or 5).
    pub fn n_local_dofs(&self) -> usize {
        match self {
            Cell::Plain(_) => 3,
            Cell::Macro(_) => 5,
        }
    }

    /// Sub-cell polygons (counterclockwise or clockwise, consistently) with their side tags.
    pub fn subcells(&self) -> Vec<(Vec<usize>, SideTag)> {
        match self {
            Cell::Plain(p) => vec![(p.vertices.to_vec(), p.side)],
            Cell::Macro(m) => vec![
                (m.quad_subcell().to_vec(), m.quad_side),
                (m.tri_subcell().to_vec(), m.tri_side),
            ],
        }
    }

    /// Sub-cells touching local edge `local`.
    pub fn edge_subcells(&self, local: usize) -> &'static [usize] {
        match self {
            Cell::Plain(_) => &[0],
            Cell::Macro(_) => match local {
                0 | 1 | 4 => &[QUAD_SUBCELL],
                2 | 3 => &[TRI_SUBCELL],
                _ => &[QUAD_SUBCELL, TRI_SUBCELL],
            },
        }
    }

    pub fn parent(&self) -> usize {
        match self {
            Cell::Plain(p) => p.parent,
            Cell::Macro(m) => m.parent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    InteriorRegular,
    /// Lies on the discrete interface: the two incident sub-cells have different sides.
    InterfaceGammaH,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub cell: usize,
    pub local: usize,
    pub subcell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Sorted endpoint indices.
    pub vertices: [usize; 2],
    pub class: EdgeClass,
    pub incident: Vec<Incidence>,
    /// The cut `A3 A5` of a macro cell (both incidences belong to the same cell).
    pub macro_internal: bool,
}

#[derive(Debug, Clone)]
pub struct FittedMesh {
    pub n: usize,
    pub h: f64,
    /// Background vertices followed by the edge/interface intersection points.
    pub vertices: Vec<Point2>,
    /// Vertices lying on the discrete interface (intersection points and snapped vertices).
    pub on_interface: Vec<bool>,
    pub n_background_vertices: usize,
    pub cells: Vec<Cell>,
    /// Edges sorted by `(min endpoint, max endpoint)`.
    pub edges: Vec<Edge>,
    /// Global edge index of each local edge of each cell.
    pub cell_edges: Vec<Vec<usize>>,
    /// Cells covering each background triangle.
    pub cells_of_parent: Vec<Vec<usize>>,
}

impl FittedMesh {
    pub fn point(&self, v: usize) -> Point2 {
        self.vertices[v]
    }

    pub fn points<const N: usize>(&self, idx: [usize; N]) -> [Point2; N] {
        idx.map(|v| self.vertices[v])
    }

    pub fn polygon(&self, idx: &[usize]) -> Vec<Point2> {
        idx.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        self.vertices[a].distance(self.vertices[b])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point2 {
        let [a, b] = self.edges[e].vertices;
        self.vertices[a].midpoint(self.vertices[b])
    }

    /// Sum of absolute sub-cell areas.
    pub fn total_area(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| c.subcells())
            .map(|(poly, _)| polygon_area(&self.polygon(&poly)).abs())
            .sum()
    }

    pub fn count_class(&self, class: EdgeClass) -> usize {
        self.edges.iter().filter(|e| e.class == class).count()
    }

    /// Cell and sub-cell containing `p` (closed sub-cells, first match).
    pub fn locate(&self, p: Point2) -> Option<(usize, usize)> {
        let n = self.n;
        let fi = ((p.x + 1.0) / self.h).floor();
        let fj = ((p.y + 1.0) / self.h).floor();
        if !(fi >= -1.0 && fj >= -1.0 && fi <= n as f64 && fj <= n as f64) {
            return None;
        }
        let clamp = |v: f64| (v.max(0.0) as usize).min(n - 1);
        let (i, j) = (clamp(fi), clamp(fj));
        let sq = j * n + i;
        for parent in [2 * sq, 2 * sq + 1] {
            for &c in &self.cells_of_parent[parent] {
                for (k, (poly, _)) in self.cells[c].subcells().iter().enumerate() {
                    if polygon_contains(&self.polygon(poly), p) {
                        return Some((c, k));
                    }
                }
            }
        }
        None
    }

    /// Discrete side (the side tag of the sub-cell containing `p`).
    pub fn discrete_side(&self, p: Point2) -> Option<SideTag> {
        self.locate(p)
            .map(|(c, k)| self.cells[c].subcells()[k].1)
    }
}

/// Convex-polygon containment, tolerant to points on the boundary.
fn polygon_contains(poly: &[Point2], p: Point2) -> bool {
    let area = polygon_area(poly);
    let sign = area.signum();
    let scale = area.abs();
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        sign * (b - a).cross(p - a) >= -1e-14 * scale
    })
}
