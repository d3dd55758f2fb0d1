use std::collections::{BTreeMap, BTreeSet};

use aniso_ncfem::geometry::{Circle, LevelSet, Point2, SideTag};
use aniso_ncfem::mesh::{build_background, generate_fitted, quality_report, Cell, EdgeClass, FittedMesh, MeshOptions};

fn circle() -> Circle {
    Circle::new(Point2::default(), 0.5)
}

fn mesh(n: usize) -> FittedMesh {
    generate_fitted(&build_background(n).unwrap(), &circle(), &MeshOptions::default()).unwrap()
}

#[test]
fn cell_areas_sum_to_the_square() {
    for n in [8, 16, 32, 64] {
        let area = mesh(n).total_area();
        assert!((area - 4.0).abs() <= 1e-12 * 4.0, "n={n}: {area}");
    }
}

#[test]
fn interface_edges_form_one_closed_polyline() {
    for n in [8, 16, 32, 64] {
        let fm = mesh(n);
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in fm.edges.iter().filter(|e| e.class == EdgeClass::InterfaceGammaH) {
            let [a, b] = e.vertices;
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        assert!(adj.values().all(|v| v.len() == 2), "n={n}: open polyline");
        assert!(adj.keys().all(|&v| fm.on_interface[v]));
        // walk the loop from any vertex
        let start = *adj.keys().next().unwrap();
        let (mut prev, mut cur, mut steps) = (start, adj[&start][0], 1);
        while cur != start {
            let next = if adj[&cur][0] == prev { adj[&cur][1] } else { adj[&cur][0] };
            prev = cur;
            cur = next;
            steps += 1;
        }
        assert_eq!(steps, adj.len(), "n={n}: more than one component");
    }
}

#[test]
fn crossing_vertices_are_shared_by_both_cut_triangles() {
    let fm = mesh(32);
    let mut parents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); fm.vertices.len()];
    for cell in &fm.cells {
        let verts: Vec<usize> = match cell {
            Cell::Plain(p) => p.vertices.to_vec(),
            Cell::Macro(m) => m.outer.to_vec(),
        };
        for v in verts {
            parents[v].insert(cell.parent());
        }
    }
    let added = fm.n_background_vertices..fm.vertices.len();
    assert!(!added.is_empty());
    for v in added {
        assert_eq!(parents[v].len(), 2, "vertex {v}");
        assert!(circle().value(fm.point(v)).abs() < 1e-14);
    }
}

#[test]
fn interface_edges_separate_the_two_sides() {
    let fm = mesh(32);
    for e in fm.edges.iter().filter(|e| e.class == EdgeClass::InterfaceGammaH) {
        let sides: Vec<SideTag> = e
            .incident
            .iter()
            .map(|inc| fm.cells[inc.cell].subcells()[inc.subcell].1)
            .collect();
        assert_eq!(sides.len(), 2);
        assert_ne!(sides[0], sides[1]);
    }
}

#[test]
fn refinement_keeps_side_tags_of_interior_points() {
    let probes: Vec<Point2> = (0..40)
        .map(|k| {
            let th = k as f64 * 0.37;
            let r = [0.1, 0.3, 0.38, 0.62, 0.7, 0.9][k % 6];
            Point2::new(r * th.cos(), r * th.sin())
        })
        .collect();
    for n in [8, 16, 32, 64] {
        let fm = mesh(n);
        for &p in &probes {
            let expected = if circle().value(p) < 0.0 { SideTag::Omega1 } else { SideTag::Omega2 };
            assert_eq!(fm.discrete_side(p), Some(expected), "n={n} p={p:?}");
        }
    }
}

#[test]
fn maximum_angle_is_bounded_independently_of_h() {
    // observed bound: 135 degrees, i.e. theta_0 = 45 degrees, at every level
    let mut worst: f64 = 0.0;
    for n in [8, 16, 32, 64, 128] {
        let q = quality_report(&mesh(n));
        assert!(q.max_angle_deg <= 135.0 + 1e-9, "n={n}: {}", q.max_angle_deg);
        worst = worst.max(q.max_angle_deg);
    }
    assert!(worst > 120.0);
}

#[test]
fn cut_ratios_are_ordered() {
    let fm = mesh(64);
    for cell in &fm.cells {
        if let Cell::Macro(m) = cell {
            assert!(m.s > 0.0 && m.s <= m.t && m.t < 1.0);
            // the affine map sends A1, A2, A4 to the reference vertices
            for (v, r) in [(0, (0.0, 0.0)), (1, (1.0, 0.0)), (3, (0.0, 1.0))] {
                let q = m.map.apply(Point2::new(r.0, r.1));
                assert!(q.distance(fm.point(m.outer[v])) < 1e-14);
            }
        }
    }
}
