//! Reference macro-element basis, Crouzeix-Raviart basis, affine maps and triangle quadrature.
//!
//! The reference macro-element is the unit right triangle with vertices
//! `A1 = (0,0)`, `A2 = (1,0)`, `A4 = (0,1)`, cut by the segment from `A3 = (1-s, s)`
//! to `A5 = (0, t)`. The quadrilateral `Q = A1 A2 A3 A5` and the triangle `T = A3 A4 A5`
//! each carry an affine piece. Local degrees of freedom are the values at the midpoints of
//! the five outer sub-edges `A1A2, A2A3, A3A4, A4A5, A5A1`; the two pieces are coupled by
//! continuity at the midpoint of the cut `A3A5`.

use thiserror::Error;

use crate::geometry::Point2;

/// Tolerance of the Kronecker/continuity self-check run when a basis is built.
pub const BASIS_CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("invalid cut ratios s = {s}, t = {t}: need 0 < s <= t < 1")]
    InvalidCutRatio { s: f64, t: f64 },
    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),
    #[error("basis self-check failed for s = {s}, t = {t}: defect {defect:e}")]
    BasisCheckFailed { s: f64, t: f64, defect: f64 },
    #[error("singular affine map (det = {0:e})")]
    SingularMap(f64),
}

/// `a x + b y + c`
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffineFn {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AffineFn {
    pub const ZERO: AffineFn = AffineFn { a: 0.0, b: 0.0, c: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.a, self.b]
    }
}

/// Sub-cell of a macro-element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubCell {
    /// `A1 A2 A3 A5`
    Quad,
    /// `A3 A4 A5`
    Tri,
}

/// The five-function basis on the reference macro-element for cut ratios `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMacro {
    pub s: f64,
    pub t: f64,
    pub area_q: f64,
    pub area_t: f64,
    /// Affine piece of each basis function on `Q`.
    pub quad: [AffineFn; 5],
    /// Affine piece of each basis function on `T`.
    pub tri: [AffineFn; 5],
}

impl ReferenceMacro {
    pub fn new(s: f64, t: f64) -> Result<Self, ElementError> {
        if !(s > 0.0 && s <= t && t < 1.0) {
            return Err(ElementError::InvalidCutRatio { s, t });
        }
        let (area_q, area_t, q, tr) = closed_form(s, t);
        let piece = |c: [f64; 3]| AffineFn::new(c[0], c[1], c[2]);
        let quad = q.map(piece);
        let tri = tr.map(piece);

        let rm = Self {
            s,
            t,
            area_q,
            area_t,
            quad,
            tri,
        };
        // Coefficients grow like 1/|T| as t -> 1; the check is relative to that scale.
        let defect = rm.self_check_defect();
        if !(defect <= BASIS_CHECK_TOL * rm.coefficient_scale()) {
            return Err(ElementError::BasisCheckFailed { s, t, defect });
        }
        Ok(rm)
    }

    /// Reference vertices `A1..A5`.
    pub fn vertices(&self) -> [Point2; 5] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0 - self.s, self.s),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, self.t),
        ]
    }

    /// Midpoints `m1..m5` of the outer sub-edges followed by `m6`, the midpoint of the cut.
    pub fn midpoints(&self) -> [Point2; 6] {
        let v = self.vertices();
        [
            v[0].midpoint(v[1]),
            v[1].midpoint(v[2]),
            v[2].midpoint(v[3]),
            v[3].midpoint(v[4]),
            v[4].midpoint(v[0]),
            v[2].midpoint(v[4]),
        ]
    }

    /// The sub-cell holding the midpoint of local edge `i`.
    pub fn edge_subcell(i: usize) -> SubCell {
        match i {
            0 | 1 | 4 => SubCell::Quad,
            2 | 3 => SubCell::Tri,
            _ => panic!("macro-element has five outer edges, got index {i}"),
        }
    }

    pub fn piece(&self, i: usize, sub: SubCell) -> AffineFn {
        match sub {
            SubCell::Quad => self.quad[i],
            SubCell::Tri => self.tri[i],
        }
    }

    /// `M[i][j] = phi_j(m_i)`, evaluating each basis function on the sub-cell owning `m_i`.
    pub fn midpoint_matrix(&self) -> [[f64; 5]; 5] {
        let m = self.midpoints();
        let mut out = [[0.0; 5]; 5];
        for (i, row) in out.iter_mut().enumerate() {
            let sub = Self::edge_subcell(i);
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.piece(j, sub).eval(m[i]);
            }
        }
        out
    }

    /// `|phi_i^Q(m6) - phi_i^T(m6)|` for each basis function.
    pub fn m6_jumps(&self) -> [f64; 5] {
        let m6 = self.midpoints()[5];
        std::array::from_fn(|i| (self.quad[i].eval(m6) - self.tri[i].eval(m6)).abs())
    }

    /// `max(1, largest |coefficient|)` over all pieces.
    pub fn coefficient_scale(&self) -> f64 {
        self.quad
            .iter()
            .chain(&self.tri)
            .fold(1.0_f64, |m, f| m.max(f.a.abs()).max(f.b.abs()).max(f.c.abs()))
    }

    /// `max_i |phi_i|_{H1(sub)} |sub|^{1/2}` for the quadrilateral and the triangle.
    pub fn scaled_h1_bounds(&self) -> (f64, f64) {
        let bound = |pieces: &[AffineFn; 5], area: f64| {
            pieces.iter().fold(0.0_f64, |m, f| {
                let [gx, gy] = f.gradient();
                m.max(gx.hypot(gy) * area)
            })
        };
        (bound(&self.quad, self.area_q), bound(&self.tri, self.area_t))
    }

    fn self_check_defect(&self) -> f64 {
        let m = self.midpoint_matrix();
        let mut defect: f64 = 0.0;
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((v - delta).abs());
            }
        }
        for j in self.m6_jumps() {
            defect = defect.max(j);
        }
        defect
    }
}

/// Arithmetic needed to evaluate the closed-form basis in more than one precision.
pub trait Scalar:
    Copy
    + From<f64>
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
}

impl<F> Scalar for F where
    F: Copy
        + From<f64>
        + std::ops::Add<Output = F>
        + std::ops::Sub<Output = F>
        + std::ops::Mul<Output = F>
        + std::ops::Div<Output = F>
        + std::ops::Neg<Output = F>
{
}

type Pieces<F> = [[F; 3]; 5];

/// `(|Q|, |T|, Q-pieces, T-pieces)` of the basis, each piece as `[a, b, c]` for
/// `a x + b y + c`.
pub fn closed_form<F: Scalar>(s: F, t: F) -> (F, F, Pieces<F>, Pieces<F>) {
    let c = |v: f64| F::from(v);
    let one = c(1.0);
    let half = c(0.5);
    let zero = c(0.0);
    let area_q = half * (t + s - s * t);
    let area_t = half * (one - t) * (one - s);
    let q = |v: [F; 3]| v.map(|x| x / area_q);
    let tr = |v: [F; 3]| v.map(|x| x / area_t);
    // common T-piece of phi_1, phi_2 and phi_5 up to sign and constant
    let tx = s - t;
    let ty = s - one;
    let quad = [
        q([s - t, s - c(2.0), t - half * s * t]),
        q([t, one, -(half * t)]),
        [zero; 3],
        [zero; 3],
        q([-s, one - s, half * s]),
    ];
    let tri = [
        tr([-tx, -ty, -(half * (one + t - s - s * t))]),
        tr([tx, ty, half * (one + t - s - s * t)]),
        tr([one - s, one - s, -(half * (one + t) * (one - s))]),
        tr([t - one, zero, half * (one - t) * (one - s)]),
        tr([tx, ty, half * (one + t) * (one - s)]),
    ];
    (area_q, area_t, quad, tri)
}

/// `(max |M - I|, max m6 jump)` of the closed-form basis evaluated in double-double
/// arithmetic, so that the result reflects the formulas rather than f64 cancellation on
/// thin triangles.
pub fn extended_precision_defects(s: f64, t: f64) -> Result<(f64, f64), ElementError> {
    use twofloat::TwoFloat;
    if !(s > 0.0 && s <= t && t < 1.0) {
        return Err(ElementError::InvalidCutRatio { s, t });
    }
    let (s2, t2) = (TwoFloat::from(s), TwoFloat::from(t));
    let (_, _, quad, tri) = closed_form(s2, t2);
    let one = TwoFloat::from(1.0);
    let zero = TwoFloat::from(0.0);
    let half = TwoFloat::from(0.5);
    let v = [(zero, zero), (one, zero), (one - s2, s2), (zero, one), (zero, t2)];
    let mid = |i: usize, j: usize| (half * (v[i].0 + v[j].0), half * (v[i].1 + v[j].1));
    let mids = [mid(0, 1), mid(1, 2), mid(2, 3), mid(3, 4), mid(4, 0), mid(2, 4)];
    let eval = |p: [TwoFloat; 3], m: (TwoFloat, TwoFloat)| p[0] * m.0 + p[1] * m.1 + p[2];
    let mut matrix_defect: f64 = 0.0;
    for (i, &m) in mids.iter().take(5).enumerate() {
        let pieces = match ReferenceMacro::edge_subcell(i) {
            SubCell::Quad => &quad,
            SubCell::Tri => &tri,
        };
        for (j, p) in pieces.iter().enumerate() {
            let delta = if i == j { one } else { zero };
            matrix_defect = matrix_defect.max(f64::from(eval(*p, m) - delta).abs());
        }
    }
    let jump = (0..5).fold(0.0_f64, |acc, j| acc.max(f64::from(eval(quad[j], mids[5]) - eval(tri[j], mids[5])).abs()));
    Ok((matrix_defect, jump))
}

pub fn reference_macro(s: f64, t: f64) -> Result<ReferenceMacro, ElementError> {
    ReferenceMacro::new(s, t)
}

/// Constant gradient of basis function `i` (0-based) on the given sub-cell.
pub fn grad_reference_basis(rm: &ReferenceMacro, i: usize, sub: SubCell) -> [f64; 2] {
    rm.piece(i, sub).gradient()
}

/// `x = B x_ref + b`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    /// Row-major `[[b00, b01], [b10, b11]]`; columns are the images of the reference axes.
    pub b: [[f64; 2]; 2],
    pub offset: Point2,
    pub det: f64,
    /// `B^{-T}`, row-major.
    pub inv_t: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn new(b: [[f64; 2]; 2], offset: Point2) -> Result<Self, ElementError> {
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(ElementError::SingularMap(det));
        }
        let id = 1.0 / det;
        // B^{-1} = [[b11, -b01], [-b10, b00]] / det, transposed:
        let inv_t = [[b[1][1] * id, -b[1][0] * id], [-b[0][1] * id, b[0][0] * id]];
        Ok(Self { b, offset, det, inv_t })
    }

    /// The map sending `(0,0) -> p0`, `(1,0) -> p1`, `(0,1) -> p2`.
    pub fn from_triangle(p0: Point2, p1: Point2, p2: Point2) -> Result<Self, ElementError> {
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        Self::new([[e1.x, e2.x], [e1.y, e2.y]], p0)
    }

    pub fn apply(&self, r: Point2) -> Point2 {
        Point2::new(
            self.b[0][0] * r.x + self.b[0][1] * r.y + self.offset.x,
            self.b[1][0] * r.x + self.b[1][1] * r.y + self.offset.y,
        )
    }

    pub fn inverse(&self, p: Point2) -> Point2 {
        let d = p - self.offset;
        // x_ref = B^{-1} d = (B^{-T})^T d
        Point2::new(
            self.inv_t[0][0] * d.x + self.inv_t[1][0] * d.y,
            self.inv_t[0][1] * d.x + self.inv_t[1][1] * d.y,
        )
    }

    /// Physical form of the reference affine function `f_ref`, i.e. `f_ref o F^{-1}`.
    pub fn push_forward(&self, f_ref: AffineFn) -> AffineFn {
        let [a, b] = physical_gradient(self, f_ref.gradient());
        AffineFn::new(a, b, f_ref.c - a * self.offset.x - b * self.offset.y)
    }
}

/// `B^{-T} g`
pub fn physical_gradient(map: &AffineMap, g: [f64; 2]) -> [f64; 2] {
    [
        map.inv_t[0][0] * g[0] + map.inv_t[0][1] * g[1],
        map.inv_t[1][0] * g[0] + map.inv_t[1][1] * g[1],
    ]
}

/// The three Crouzeix-Raviart basis functions of a triangle in physical coordinates.
///
/// Function `k` is 1 at the midpoint of the edge opposite vertex `k` and 0 at the other two
/// midpoints (`psi_k = 1 - 2 lambda_k`).
pub fn crouzeix_raviart_basis(p: [Point2; 3]) -> Result<[AffineFn; 3], ElementError> {
    let map = AffineMap::from_triangle(p[0], p[1], p[2])?;
    // Barycentrics on the reference triangle.
    let lambdas = [
        AffineFn::new(-1.0, -1.0, 1.0),
        AffineFn::new(1.0, 0.0, 0.0),
        AffineFn::new(0.0, 1.0, 0.0),
    ];
    Ok(lambdas.map(|l| {
        let l = map.push_forward(l);
        AffineFn::new(-2.0 * l.a, -2.0 * l.b, 1.0 - 2.0 * l.c)
    }))
}

/// Symmetric quadrature on a triangle in barycentric form.
///
/// Weights sum to one; multiply by the triangle area at the use site.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// `sum_q w_q f(x_q) * area` over triangle `p`.
    pub fn integrate<F: FnMut(Point2) -> f64>(&self, p: [Point2; 3], mut f: F) -> f64 {
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
        let mut acc = 0.0;
        for (bc, w) in self.points.iter().zip(&self.weights) {
            acc += w * f(barycentric_point(p, *bc));
        }
        acc * area
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn barycentric_point(p: [Point2; 3], bc: [f64; 3]) -> Point2 {
    Point2::new(
        bc[0] * p[0].x + bc[1] * p[1].x + bc[2] * p[2].x,
        bc[0] * p[0].y + bc[1] * p[1].y + bc[2] * p[2].y,
    )
}

/// Degree 2: the three edge midpoints. Degree 4: the six-point symmetric (Dunavant) rule.
pub fn quadrature(degree: usize) -> Result<QuadratureRule, ElementError> {
    match degree {
        2 => Ok(QuadratureRule {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }),
        4 => {
            let r = (38.0 - 44.0 * (0.4_f64).sqrt()).sqrt();
            let a1 = (8.0 - 10.0_f64.sqrt() + r) / 18.0;
            let a2 = (8.0 - 10.0_f64.sqrt() - r) / 18.0;
            let q = (213125.0 - 53320.0 * 10.0_f64.sqrt()).sqrt();
            let w1 = (620.0 + q) / 3720.0;
            let w2 = (620.0 - q) / 3720.0;
            let mut points = Vec::with_capacity(6);
            let mut weights = Vec::with_capacity(6);
            for (a, w) in [(a1, w1), (a2, w2)] {
                let b = 1.0 - 2.0 * a;
                points.extend([[b, a, a], [a, b, a], [a, a, b]]);
                weights.extend([w; 3]);
            }
            Ok(QuadratureRule {
                points,
                weights,
                degree: 4,
            })
        }
        d => Err(ElementError::UnsupportedDegree(d)),
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Conical (collapsed) Gauss product rule with `n` points per direction, exact to degree
/// `2n - 2` on triangles. Used as a high-order reference rule.
pub fn conical_product(n: usize) -> QuadratureRule {
    let (x, wx) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &u) in x.iter().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            // (u, v) in the unit square -> (u, (1-u) v) in the unit triangle, Jacobian (1-u);
            // reference area 1/2 normalizes weights to sum to one.
            let xr = u;
            let yr = (1.0 - u) * v;
            points.push([1.0 - xr - yr, xr, yr]);
            weights.push(2.0 * wx[i] * wx[j] * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: 2 * n - 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn unit_tri() -> [Point2; 3] {
        [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]
    }

    /// `int_T x^a y^b` over the unit right triangle = a! b! / (a + b + 2)!
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn rejects_invalid_cut_ratios() {
        for (s, t) in [(0.0, 0.5), (0.6, 0.5), (0.3, 1.0), (-0.1, 0.2), (f64::NAN, 0.5)] {
            assert!(matches!(
                reference_macro(s, t),
                Err(ElementError::InvalidCutRatio { .. })
            ));
        }
    }

    #[test]
    fn areas_at_half() {
        let rm = reference_macro(0.5, 0.5).unwrap();
        assert!((rm.area_q - 3.0 / 8.0).abs() < 1e-15);
        assert!((rm.area_t - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn areas_sum_to_reference_triangle() {
        for (s, t) in [(0.1, 0.9), (0.4, 0.4), (0.01, 0.02)] {
            let rm = reference_macro(s, t).unwrap();
            assert!((rm.area_q + rm.area_t - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn phi3_and_phi4_vanish_on_quad() {
        let rm = reference_macro(0.3, 0.7).unwrap();
        assert_eq!(rm.quad[2], AffineFn::ZERO);
        assert_eq!(rm.quad[3], AffineFn::ZERO);
        assert_eq!(grad_reference_basis(&rm, 2, SubCell::Quad), [0.0, 0.0]);
    }

    #[test]
    fn reference_gradients() {
        let (s, t) = (0.25, 0.6);
        let rm = reference_macro(s, t).unwrap();
        let g = grad_reference_basis(&rm, 1, SubCell::Quad);
        assert!((g[0] - t / rm.area_q).abs() < 1e-14);
        assert!((g[1] - 1.0 / rm.area_q).abs() < 1e-14);
        // phi_4 on T is 1 at m4 = (0, (1+t)/2) and 0 on the vertical line x = (1-s)/2
        let g = grad_reference_basis(&rm, 3, SubCell::Tri);
        assert!((g[0] - (t - 1.0) / rm.area_t).abs() < 1e-13);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn midpoint_matrix_is_identity() {
        let rm = reference_macro(0.2, 0.55).unwrap();
        let m = rm.midpoint_matrix();
        for i in 0..5 {
            for j in 0..5 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j] - d).abs() < 1e-13, "({i},{j}) = {}", m[i][j]);
            }
        }
    }

    /// Independent construction: solve for the Q-piece from (m1, m2, m5) and the T-piece from
    /// (m3, m4, m6) with the m6 value taken from the Q-piece.
    fn interpolated_basis(s: f64, t: f64) -> ([AffineFn; 5], [AffineFn; 5]) {
        let rm_points = {
            let v = [
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0 - s, s),
                Point2::new(0.0, 1.0),
                Point2::new(0.0, t),
            ];
            [
                v[0].midpoint(v[1]),
                v[1].midpoint(v[2]),
                v[2].midpoint(v[3]),
                v[3].midpoint(v[4]),
                v[4].midpoint(v[0]),
                v[2].midpoint(v[4]),
            ]
        };
        let fit = |pts: [Point2; 3], vals: [f64; 3]| -> AffineFn {
            let m = nalgebra::Matrix3::new(
                pts[0].x, pts[0].y, 1.0, pts[1].x, pts[1].y, 1.0, pts[2].x, pts[2].y, 1.0,
            );
            let c = m.lu().solve(&nalgebra::Vector3::new(vals[0], vals[1], vals[2])).unwrap();
            AffineFn::new(c[0], c[1], c[2])
        };
        let m = rm_points;
        let mut quad = [AffineFn::ZERO; 5];
        let mut tri = [AffineFn::ZERO; 5];
        for i in 0..5 {
            let d = |k: usize| if k == i { 1.0 } else { 0.0 };
            quad[i] = fit([m[0], m[1], m[4]], [d(0), d(1), d(4)]);
            let at6 = quad[i].eval(m[5]);
            tri[i] = fit([m[2], m[3], m[5]], [d(2), d(3), at6]);
        }
        (quad, tri)
    }

    #[test]
    fn closed_forms_match_interpolated_basis() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(0.01..0.99);
            let b: f64 = rng.gen_range(0.01..0.99);
            let (s, t) = (a.min(b), a.max(b));
            let rm = reference_macro(s, t).unwrap();
            let (quad, tri) = interpolated_basis(s, t);
            let scale = 1.0 / rm.area_t;
            for i in 0..5 {
                for (x, y) in [(rm.quad[i], quad[i]), (rm.tri[i], tri[i])] {
                    assert!((x.a - y.a).abs() <= 1e-9 * scale);
                    assert!((x.b - y.b).abs() <= 1e-9 * scale);
                    assert!((x.c - y.c).abs() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn crouzeix_raviart_is_nodal_at_midpoints() {
        let p = [Point2::new(0.3, -0.1), Point2::new(1.2, 0.4), Point2::new(0.1, 0.9)];
        let basis = crouzeix_raviart_basis(p).unwrap();
        for (k, psi) in basis.iter().enumerate() {
            for j in 0..3 {
                let mid = p[(j + 1) % 3].midpoint(p[(j + 2) % 3]);
                let d = if j == k { 1.0 } else { 0.0 };
                assert!((psi.eval(mid) - d).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn affine_map_inverse_transpose() {
        let map = AffineMap::new([[0.3, -0.2], [0.1, 0.7]], Point2::new(1.0, 2.0)).unwrap();
        // B^{-T} B^T = I
        let bt = [[map.b[0][0], map.b[1][0]], [map.b[0][1], map.b[1][1]]];
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| map.inv_t[i][k] * bt[k][j]).sum();
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((v - d).abs() < 1e-14);
            }
        }
        let r = Point2::new(0.2, 0.3);
        let back = map.inverse(map.apply(r));
        assert!(back.distance(r) < 1e-14);
    }

    #[test]
    fn singular_map_is_rejected() {
        assert!(AffineMap::new([[1.0, 2.0], [2.0, 4.0]], Point2::default()).is_err());
    }

    #[test]
    fn gradient_scaling() {
        let h = 0.125;
        let map = AffineMap::new([[h, 0.0], [0.0, h]], Point2::default()).unwrap();
        let g = physical_gradient(&map, [1.0, -2.0]);
        assert!((g[0] - 1.0 / h).abs() < 1e-14 && (g[1] + 2.0 / h).abs() < 1e-14);
        let id = AffineMap::new([[1.0, 0.0], [0.0, 1.0]], Point2::default()).unwrap();
        assert_eq!(physical_gradient(&id, [0.3, 0.4]), [0.3, 0.4]);
    }

    #[test]
    fn pushforward_gradient_matches_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..3 {
            let b = [
                [rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)],
                [rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5)],
            ];
            let map = AffineMap::new(b, Point2::new(rng.gen(), rng.gen())).unwrap();
            let f_ref = AffineFn::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.3);
            let v = |p: Point2| f_ref.eval(map.inverse(p));
            let x = Point2::new(0.4, -0.2);
            let d = 1e-4;
            let fd = [
                (v(Point2::new(x.x + d, x.y)) - v(Point2::new(x.x - d, x.y))) / (2.0 * d),
                (v(Point2::new(x.x, x.y + d)) - v(Point2::new(x.x, x.y - d))) / (2.0 * d),
            ];
            let g = physical_gradient(&map, f_ref.gradient());
            assert!((g[0] - fd[0]).abs() < 1e-9 && (g[1] - fd[1]).abs() < 1e-9);
            let pf = map.push_forward(f_ref);
            assert!((pf.eval(x) - v(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_examples() {
        let q2 = quadrature(2).unwrap();
        assert!((q2.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let xy = q2.integrate(unit_tri(), |p| p.x * p.y);
        assert!((xy - 1.0 / 24.0).abs() < 1e-15);
        let q4 = quadrature(4).unwrap();
        let x4 = q4.integrate(unit_tri(), |p| p.x.powi(4));
        assert!((x4 - 1.0 / 30.0).abs() < 1e-14);
        assert!(matches!(quadrature(3), Err(ElementError::UnsupportedDegree(3))));
    }

    #[test]
    fn quadrature_exactness_on_monomials() {
        for rule in [quadrature(2).unwrap(), quadrature(4).unwrap(), conical_product(4)] {
            for a in 0..=rule.degree as u32 {
                for b in 0..=(rule.degree as u32 - a) {
                    let q = rule.integrate(unit_tri(), |p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    assert!(
                        (q - monomial_integral(a, b)).abs() < 1e-13,
                        "degree {} rule fails on x^{a} y^{b}",
                        rule.degree
                    );
                }
            }
        }
    }

    #[test]
    fn degree_two_rule_is_not_exact_on_cubics() {
        let q = quadrature(2).unwrap().integrate(unit_tri(), |p| p.x.powi(3));
        assert!((q - monomial_integral(3, 0)).abs() > 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn partition_of_unity(a in 0.001..0.999f64, b in 0.001..0.999f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
                let rm = reference_macro(a.min(b), a.max(b)).unwrap();
                let p = Point2::new(x, y);
                let sq: f64 = rm.quad.iter().map(|f| f.eval(p)).sum();
                let st: f64 = rm.tri.iter().map(|f| f.eval(p)).sum();
                let scale = 1.0 / rm.area_t + 1.0 / rm.area_q;
                prop_assert!((sq - 1.0).abs() <= 1e-13 * scale);
                prop_assert!((st - 1.0).abs() <= 1e-13 * scale);
            }

            #[test]
            fn pieces_agree_at_cut_midpoint(a in 0.001..0.999f64, b in 0.001..0.999f64) {
                let rm = reference_macro(a.min(b), a.max(b)).unwrap();
                // stored f64 pieces: roundoff scales with the coefficients
                for j in rm.m6_jumps() {
                    prop_assert!(j <= 1e-13 * rm.coefficient_scale());
                }
                let (matrix, jump) = extended_precision_defects(rm.s, rm.t).unwrap();
                prop_assert!(matrix <= 1e-12);
                prop_assert!(jump <= 1e-13);
            }
        }
    }
}
