use std::collections::HashMap;

use crate::element::AffineMap;
use crate::geometry::{polygon_area, segment_crossing, LevelSet, Point2, SideTag, DEFAULT_SNAP_TOL};

use super::{
    BackgroundMesh, Cell, Edge, EdgeClass, FittedMesh, Incidence, MacroCell, MeshError, PlainTri,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Vertices with `|phi| <= snap_tol` are placed on the interface.
    pub snap_tol: f64,
    /// Edge crossings closer than this (relative edge parameter) to an endpoint are moved onto it.
    pub lambda_snap: f64,
    /// Relative level-set tolerance of the edge root search.
    pub root_tol: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            snap_tol: DEFAULT_SNAP_TOL,
            lambda_snap: 1e-8,
            root_tol: 1e-15,
        }
    }
}

fn sign(tag: SideTag) -> i8 {
    match tag {
        SideTag::Omega1 => -1,
        SideTag::Omega2 => 1,
        SideTag::OnInterface => 0,
    }
}

fn tag(sign: i8) -> SideTag {
    match sign {
        -1 => SideTag::Omega1,
        1 => SideTag::Omega2,
        _ => SideTag::OnInterface,
    }
}

/// Ratio of `|from p|` to `|from to|` for `p` on segment `from -> to`.
fn ratio_along(from: Point2, to: Point2, p: Point2) -> f64 {
    let d = to - from;
    (p - from).dot(d) / d.dot(d)
}

/// Cut the background mesh along the polygonal interface through its edge crossings.
pub fn generate_fitted<L: LevelSet + ?Sized>(
    bg: &BackgroundMesh,
    ls: &L,
    opts: &MeshOptions,
) -> Result<FittedMesh, MeshError> {
    let mut vertices = bg.vertices.clone();
    let n_bg = vertices.len();
    let mut signs: Vec<i8> = vertices
        .iter()
        .map(|&p| sign(SideTag::from_value(ls.value(p), opts.snap_tol)))
        .collect();
    let bg_edges = bg.edges();

    // Pass 1: crossings on edges with a strict sign change; snap those near an endpoint.
    let mut crossings: Vec<Option<f64>> = vec![None; bg_edges.len()];
    for (k, &[a, b]) in bg_edges.iter().enumerate() {
        if signs[a] * signs[b] >= 0 {
            continue;
        }
        let Some(c) = segment_crossing(ls, vertices[a], vertices[b], opts.root_tol)? else {
            continue;
        };
        if c.lambda < opts.lambda_snap {
            signs[a] = 0;
        } else if c.lambda > 1.0 - opts.lambda_snap {
            signs[b] = 0;
        } else {
            crossings[k] = Some(c.lambda);
        }
    }

    // Pass 2: one shared vertex per edge that still changes sign.
    let mut cut_vertex: HashMap<[usize; 2], usize> = HashMap::new();
    for (k, &[a, b]) in bg_edges.iter().enumerate() {
        if signs[a] * signs[b] >= 0 {
            continue;
        }
        let lambda = match crossings[k] {
            Some(l) => l,
            None => segment_crossing(ls, vertices[a], vertices[b], opts.root_tol)?
                .map(|c| c.lambda)
                .unwrap_or(0.5),
        };
        cut_vertex.insert([a, b], vertices.len());
        vertices.push(vertices[a].lerp(vertices[b], lambda));
        signs.push(0);
    }
    let on_interface: Vec<bool> = signs.iter().map(|&s| s == 0).collect();
    let crossing_on = |a: usize, b: usize| cut_vertex[&[a.min(b), a.max(b)]];

    let mut cells = Vec::with_capacity(bg.triangles.len() + cut_vertex.len());
    let mut cells_of_parent = vec![Vec::new(); bg.triangles.len()];
    for (parent, tri) in bg.triangles.iter().enumerate() {
        let sg = tri.map(|v| signs[v]);
        let zeros = sg.iter().filter(|&&s| s == 0).count();
        let has_pos = sg.iter().any(|&s| s > 0);
        let has_neg = sg.iter().any(|&s| s < 0);

        let first = cells.len();
        if zeros == 3 {
            return Err(MeshError::AmbiguousCut { triangle: parent });
        } else if !(has_pos && has_neg) {
            let side = tag(if has_pos { 1 } else { -1 });
            cells.push(Cell::Plain(PlainTri {
                vertices: *tri,
                side,
                parent,
                from_vertex_cut: false,
            }));
        } else if zeros == 1 {
            // Through a vertex: split into two triangles.
            let k = sg.iter().position(|&s| s == 0).unwrap();
            let (z, p, m) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let c = crossing_on(p, m);
            for (verts, s) in [([z, p, c], signs[p]), ([z, c, m], signs[m])] {
                cells.push(Cell::Plain(PlainTri {
                    vertices: verts,
                    side: tag(s),
                    parent,
                    from_vertex_cut: true,
                }));
            }
        } else {
            // Through two edge interiors: the vertex with the odd sign is A4.
            let k = (0..3)
                .find(|&i| sg[i] != sg[(i + 1) % 3] && sg[i] != sg[(i + 2) % 3])
                .ok_or(MeshError::AmbiguousCut { triangle: parent })?;
            let a4 = tri[k];
            let (mut a1, mut a2) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (mut a5, mut a3) = (crossing_on(a1, a4), crossing_on(a2, a4));
            let p = |v: usize| vertices[v];
            let mut t = ratio_along(p(a1), p(a4), p(a5));
            let mut s = ratio_along(p(a2), p(a4), p(a3));
            if t < s {
                std::mem::swap(&mut a1, &mut a2);
                std::mem::swap(&mut a5, &mut a3);
                std::mem::swap(&mut s, &mut t);
            }
            if !(s > 0.0 && s <= t && t < 1.0) {
                return Err(MeshError::DegenerateCut {
                    triangle: parent,
                    s,
                    t,
                });
            }
            let map = AffineMap::from_triangle(p(a1), p(a2), p(a4))
                .map_err(|_| MeshError::DegenerateCut { triangle: parent, s, t })?;
            cells.push(Cell::Macro(MacroCell {
                outer: [a1, a2, a3, a4, a5],
                s,
                t,
                tri_side: tag(signs[a4]),
                quad_side: tag(signs[a1]),
                map,
                parent,
            }));
        }
        cells_of_parent[parent].extend(first..cells.len());
    }

    for (c, cell) in cells.iter().enumerate() {
        for (poly, _) in cell.subcells() {
            let pts: Vec<Point2> = poly.iter().map(|&v| vertices[v]).collect();
            if polygon_area(&pts).abs() <= 1e-16 * bg.h * bg.h {
                return Err(MeshError::DegenerateCut {
                    triangle: cell.parent(),
                    s: f64::NAN,
                    t: f64::NAN,
                });
            }
            debug_assert!(c < cells.len());
        }
    }

    let (edges, cell_edges) = build_edges(&cells)?;

    Ok(FittedMesh {
        n: bg.n,
        h: bg.h,
        vertices,
        on_interface,
        n_background_vertices: n_bg,
        cells,
        edges,
        cell_edges,
        cells_of_parent,
    })
}

fn build_edges(cells: &[Cell]) -> Result<(Vec<Edge>, Vec<Vec<usize>>), MeshError> {
    let mut keys: Vec<[usize; 2]> = cells
        .iter()
        .flat_map(|c| c.local_edges())
        .map(|[a, b]| [a.min(b), a.max(b)])
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let index: HashMap<[usize; 2], usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();

    let mut edges: Vec<Edge> = keys
        .iter()
        .map(|&vertices| Edge {
            vertices,
            class: EdgeClass::InteriorRegular,
            incident: Vec::with_capacity(2),
            macro_internal: false,
        })
        .collect();

    let mut cell_edges = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let mut ids = Vec::with_capacity(6);
        for (local, [a, b]) in cell.local_edges().into_iter().enumerate() {
            let e = index[&[a.min(b), a.max(b)]];
            for &subcell in cell.edge_subcells(local) {
                edges[e].incident.push(Incidence { cell: c, local, subcell });
            }
            if matches!(cell, Cell::Macro(_)) && local == super::MACRO_CUT_EDGE {
                edges[e].macro_internal = true;
            }
            ids.push(e);
        }
        cell_edges.push(ids);
    }

    for (e, edge) in edges.iter_mut().enumerate() {
        edge.class = match edge.incident.as_slice() {
            [_] => EdgeClass::Boundary,
            [i, j] => {
                let si = cells[i.cell].subcells()[i.subcell].1;
                let sj = cells[j.cell].subcells()[j.subcell].1;
                if si != sj {
                    EdgeClass::InterfaceGammaH
                } else {
                    EdgeClass::InteriorRegular
                }
            }
            other => {
                return Err(MeshError::BrokenIncidence {
                    edge: e,
                    count: other.len(),
                })
            }
        };
    }
    Ok((edges, cell_edges))
}
