use crate::geometry::Point2;

use super::{Cell, FittedMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Largest interior angle (degrees) over plain triangles, macro sub-triangles and the
    /// halves of each macro quadrilateral split along its better diagonal (the one giving
    /// the smaller maximum angle).
    pub max_angle_deg: f64,
    /// The same with every quadrilateral split along its longer diagonal.
    pub longer_diagonal_max_angle_deg: f64,
    /// Smallest and largest cut ratios over macro cells (`NaN` when there are none).
    pub min_s: f64,
    pub min_t: f64,
    pub max_t: f64,
    /// All plain triangles, including both halves of every vertex cut.
    pub plain_cells: usize,
    pub vertex_cut_pairs: usize,
    pub macro_cells: usize,
    pub background_triangles: usize,
}

impl QualityReport {
    /// Number of cells written by the VTK exporter: one per plain triangle, two per macro cell.
    pub fn vtk_cell_count(&self) -> usize {
        self.plain_cells + 2 * self.macro_cells
    }
}

fn max_angle(p: [Point2; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let a = p[(i + 1) % 3] - p[i];
            let b = p[(i + 2) % 3] - p[i];
            a.cross(b).abs().atan2(a.dot(b))
        })
        .fold(0.0, f64::max)
        .to_degrees()
}

pub fn quality_report(fm: &FittedMesh) -> QualityReport {
    let mut report = QualityReport {
        max_angle_deg: 0.0,
        longer_diagonal_max_angle_deg: 0.0,
        min_s: f64::NAN,
        min_t: f64::NAN,
        max_t: f64::NAN,
        plain_cells: 0,
        vertex_cut_pairs: 0,
        macro_cells: 0,
        background_triangles: fm.cells_of_parent.len(),
    };
    let mut vertex_cut_halves = 0;
    for cell in &fm.cells {
        match cell {
            Cell::Plain(p) => {
                report.plain_cells += 1;
                if p.from_vertex_cut {
                    vertex_cut_halves += 1;
                }
                let a = max_angle(fm.points(p.vertices));
                report.max_angle_deg = report.max_angle_deg.max(a);
                report.longer_diagonal_max_angle_deg = report.longer_diagonal_max_angle_deg.max(a);
            }
            Cell::Macro(m) => {
                report.macro_cells += 1;
                report.min_s = report.min_s.min(m.s);
                report.min_t = report.min_t.min(m.t);
                report.max_t = report.max_t.max(m.t);
                let tri = max_angle(fm.points(m.tri_subcell()));
                let [q0, q1, q2, q3] = fm.points(m.quad_subcell());
                let via_02 = max_angle([q0, q1, q2]).max(max_angle([q0, q2, q3]));
                let via_13 = max_angle([q1, q2, q3]).max(max_angle([q1, q3, q0]));
                let longer = if q0.distance(q2) >= q1.distance(q3) { via_02 } else { via_13 };
                report.max_angle_deg = report.max_angle_deg.max(tri).max(via_02.min(via_13));
                report.longer_diagonal_max_angle_deg = report.longer_diagonal_max_angle_deg.max(tri).max(longer);
            }
        }
    }
    report.vertex_cut_pairs = vertex_cut_halves / 2;
    report
}
