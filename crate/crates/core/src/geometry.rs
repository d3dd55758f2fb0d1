//! Level-set geometry: points, sign classification and edge/interface crossings.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Default absolute snapping tolerance on level-set values.
pub const DEFAULT_SNAP_TOL: f64 = 1e-12;

/// Iteration cap of the bracketed root search.
pub const MAX_ROOT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no sign change on segment: phi(a) = {phi_a:e}, phi(b) = {phi_b:e}")]
    NonBracketedRoot { phi_a: f64, phi_b: f64 },
    #[error("root search did not converge in {iterations} iterations")]
    MaxIterExceeded { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// `(1 - lambda) * self + lambda * other`
    pub fn lerp(self, other: Self, lambda: f64) -> Self {
        Self::new(
            self.x + lambda * (other.x - self.x),
            self.y + lambda * (other.y - self.y),
        )
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Signed implicit description of an interface.
///
/// Negative values are inside (the subdomain Omega1), positive values outside (Omega2).
pub trait LevelSet: Send + Sync {
    fn value(&self, p: Point2) -> f64;
    fn gradient(&self, p: Point2) -> [f64; 2];
}

impl<L: LevelSet + ?Sized> LevelSet for &L {
    fn value(&self, p: Point2) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: Point2) -> [f64; 2] {
        (**self).gradient(p)
    }
}

impl<L: LevelSet + ?Sized> LevelSet for std::sync::Arc<L> {
    fn value(&self, p: Point2) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: Point2) -> [f64; 2] {
        (**self).gradient(p)
    }
}

/// `|x - c|^2 - r^2`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub const fn new(center: Point2, radius: f64) -> Self {
        Self { center, radius }
    }
}

impl LevelSet for Circle {
    fn value(&self, p: Point2) -> f64 {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy - self.radius * self.radius
    }

    fn gradient(&self, p: Point2) -> [f64; 2] {
        [2.0 * (p.x - self.center.x), 2.0 * (p.y - self.center.y)]
    }
}

/// The level set `-phi`; swaps the two subdomains.
#[derive(Debug, Clone, Copy)]
pub struct Negated<L>(pub L);

impl<L: LevelSet> LevelSet for Negated<L> {
    fn value(&self, p: Point2) -> f64 {
        -self.0.value(p)
    }
    fn gradient(&self, p: Point2) -> [f64; 2] {
        let [gx, gy] = self.0.gradient(p);
        [-gx, -gy]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SideTag {
    Omega1,
    Omega2,
    OnInterface,
}

impl SideTag {
    /// Classify a level-set value.
    pub fn from_value(phi: f64, snap_tol: f64) -> Self {
        if phi.abs() <= snap_tol {
            SideTag::OnInterface
        } else if phi < 0.0 {
            SideTag::Omega1
        } else {
            SideTag::Omega2
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            SideTag::Omega1 => SideTag::Omega2,
            SideTag::Omega2 => SideTag::Omega1,
            SideTag::OnInterface => SideTag::OnInterface,
        }
    }

    /// 1 for Omega1, 2 for Omega2, 0 on the interface.
    pub fn index(self) -> u8 {
        match self {
            SideTag::Omega1 => 1,
            SideTag::Omega2 => 2,
            SideTag::OnInterface => 0,
        }
    }
}

pub fn eval_levelset<L: LevelSet + ?Sized>(ls: &L, p: Point2) -> f64 {
    ls.value(p)
}

pub fn side_of<L: LevelSet + ?Sized>(ls: &L, p: Point2, snap_tol: f64) -> SideTag {
    debug_assert!(snap_tol >= 0.0);
    SideTag::from_value(ls.value(p), snap_tol)
}

/// A point where the straight segment `a -> b` meets the zero level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Position along the segment, in (0, 1).
    pub lambda: f64,
    pub point: Point2,
}

/// Locate the zero of the level set on segment `a -> b`, if the endpoint values change sign.
///
/// Returns `Ok(None)` when the signs agree (or an endpoint is exactly zero).
pub fn segment_crossing<L: LevelSet + ?Sized>(
    ls: &L,
    a: Point2,
    b: Point2,
    tol: f64,
) -> Result<Option<Crossing>, GeometryError> {
    let phi_a = ls.value(a);
    let phi_b = ls.value(b);
    if phi_a * phi_b >= 0.0 {
        return Ok(None);
    }
    bracketed_root(ls, a, b, phi_a, phi_b, tol).map(Some)
}

/// As [`segment_crossing`], but the caller asserts that a crossing exists.
pub fn segment_crossing_strict<L: LevelSet + ?Sized>(
    ls: &L,
    a: Point2,
    b: Point2,
    tol: f64,
) -> Result<Crossing, GeometryError> {
    let phi_a = ls.value(a);
    let phi_b = ls.value(b);
    if phi_a * phi_b >= 0.0 {
        return Err(GeometryError::NonBracketedRoot { phi_a, phi_b });
    }
    bracketed_root(ls, a, b, phi_a, phi_b, tol)
}

/// Hybrid bisection/secant search on a bracketing segment.
///
/// Each step takes the secant (regula falsi) point when it falls well inside the current
/// bracket and the previous step shrank the bracket by at least half; otherwise it bisects.
fn bracketed_root<L: LevelSet + ?Sized>(
    ls: &L,
    a: Point2,
    b: Point2,
    phi_a: f64,
    phi_b: f64,
    tol: f64,
) -> Result<Crossing, GeometryError> {
    let target = tol * (phi_a.abs() + phi_b.abs());
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (mut f_lo, mut f_hi) = (phi_a, phi_b);
    let mut best = (0.5, f64::INFINITY);
    let mut last_width = 1.0;
    let mut use_secant = true;

    for _ in 0..MAX_ROOT_ITERATIONS {
        let width = hi - lo;
        let mut lambda = if use_secant {
            lo - f_lo * width / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(lambda > lo && lambda < hi) {
            lambda = 0.5 * (lo + hi);
        }
        if lambda <= lo || lambda >= hi {
            // bracket collapsed to adjacent floats; accept unless the function jumps there
            if (f_hi - f_lo).abs() <= 1e-8 * (phi_a.abs() + phi_b.abs()) {
                let lambda = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
                return Ok(Crossing {
                    lambda,
                    point: a.lerp(b, lambda),
                });
            }
            break;
        }
        let f = ls.value(a.lerp(b, lambda));
        if f.abs() < best.1 {
            best = (lambda, f.abs());
        }
        if f.abs() <= target {
            return Ok(Crossing {
                lambda,
                point: a.lerp(b, lambda),
            });
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = lambda;
            f_lo = f;
        } else {
            hi = lambda;
            f_hi = f;
        }
        let new_width = hi - lo;
        use_secant = new_width <= 0.5 * last_width;
        last_width = new_width;
    }

    if best.1 <= target {
        return Ok(Crossing {
            lambda: best.0,
            point: a.lerp(b, best.0),
        });
    }
    Err(GeometryError::MaxIterExceeded {
        iterations: MAX_ROOT_ITERATIONS,
    })
}

/// Twice the signed area of triangle `a b c` (positive when counterclockwise).
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a simple polygon (shoelace formula).
pub fn polygon_area(points: &[Point2]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * twice
}
