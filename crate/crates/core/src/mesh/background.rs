use crate::geometry::Point2;

use super::MeshError;

/// Uniform triangulation of `(-1, 1)^2` with `n` squares per side, each split along its
/// bottom-left to top-right diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundMesh {
    pub n: usize,
    pub h: f64,
    pub vertices: Vec<Point2>,
    /// Counterclockwise. Square `(i, j)` owns triangles `2 (j n + i)` (lower) and
    /// `2 (j n + i) + 1` (upper).
    pub triangles: Vec<[usize; 3]>,
}

pub fn build_background(n: usize) -> Result<BackgroundMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidResolution(n));
    }
    let h = 2.0 / n as f64;
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            // exact grid coordinates; avoids drift from repeated addition
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let y = -1.0 + 2.0 * j as f64 / n as f64;
            vertices.push(Point2::new(x, y));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(BackgroundMesh {
        n,
        h,
        vertices,
        triangles,
    })
}

impl BackgroundMesh {
    /// Unique edges as sorted endpoint pairs, in sorted order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| {
                [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]].map(|[a, b]| [a.min(b), a.max(b)])
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}
