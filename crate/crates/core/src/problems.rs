//! Manufactured interface problems with closed-form solutions.

use thiserror::Error;

use crate::geometry::{Circle, LevelSet, Point2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("diffusion coefficients must be positive, got beta1 = {beta1}, beta2 = {beta2}")]
    InvalidCoefficient { beta1: f64, beta2: f64 },
}

/// `-div(beta grad u) = f` on `(-1, 1)^2`, `u = 0` on the boundary, with `beta` constant on
/// each side of the level set's zero contour.
pub trait ManufacturedProblem: Send + Sync {
    fn levelset(&self) -> &dyn LevelSet;
    fn beta1(&self) -> f64;
    fn beta2(&self) -> f64;
    fn u(&self, p: Point2) -> f64;
    fn grad_u(&self, p: Point2) -> [f64; 2];
    fn f(&self, p: Point2) -> f64;

    /// Exact coefficient; `beta1` where the level set is negative.
    fn beta(&self, p: Point2) -> f64 {
        if self.levelset().value(p) < 0.0 {
            self.beta1()
        } else {
            self.beta2()
        }
    }
}

/// Circular interface with `u = phi (x^2 - 1)(y^2 - 1) / beta`.
///
/// `beta grad u = grad g` with `g = phi (x^2 - 1)(y^2 - 1)` is a single smooth field, so both
/// the solution and the normal flux are continuous across the circle and `f = -lap g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleInterface {
    pub circle: Circle,
    pub beta1: f64,
    pub beta2: f64,
}

/// Circle of radius 0.5 centred at the origin.
pub fn example1(beta1: f64, beta2: f64) -> Result<CircleInterface, ProblemError> {
    CircleInterface::new(Circle::new(Point2::new(0.0, 0.0), 0.5), beta1, beta2)
}

impl CircleInterface {
    pub fn new(circle: Circle, beta1: f64, beta2: f64) -> Result<Self, ProblemError> {
        if !(beta1 > 0.0 && beta2 > 0.0) {
            return Err(ProblemError::InvalidCoefficient { beta1, beta2 });
        }
        Ok(Self { circle, beta1, beta2 })
    }

    /// `g = phi (x^2 - 1)(y^2 - 1)`
    pub fn g(&self, p: Point2) -> f64 {
        self.circle.value(p) * (p.x * p.x - 1.0) * (p.y * p.y - 1.0)
    }

    pub fn grad_g(&self, p: Point2) -> [f64; 2] {
        let phi = self.circle.value(p);
        let [px, py] = self.circle.gradient(p);
        let bx = p.x * p.x - 1.0;
        let by = p.y * p.y - 1.0;
        [px * bx * by + phi * 2.0 * p.x * by, py * bx * by + phi * 2.0 * p.y * bx]
    }

    /// Product rule: `lap(phi b) = lap(phi) b + 2 grad(phi).grad(b) + phi lap(b)` with
    /// `b = (x^2 - 1)(y^2 - 1)`, `lap(phi) = 4`, `lap(b) = 2 (x^2 - 1) + 2 (y^2 - 1)`.
    pub fn laplacian_g(&self, p: Point2) -> f64 {
        let phi = self.circle.value(p);
        let [px, py] = self.circle.gradient(p);
        let bx = p.x * p.x - 1.0;
        let by = p.y * p.y - 1.0;
        let b = bx * by;
        let grad_b = [2.0 * p.x * by, 2.0 * p.y * bx];
        4.0 * b + 2.0 * (px * grad_b[0] + py * grad_b[1]) + phi * 2.0 * (bx + by)
    }
}

impl ManufacturedProblem for CircleInterface {
    fn levelset(&self) -> &dyn LevelSet {
        &self.circle
    }
    fn beta1(&self) -> f64 {
        self.beta1
    }
    fn beta2(&self) -> f64 {
        self.beta2
    }
    fn u(&self, p: Point2) -> f64 {
        self.g(p) / self.beta(p)
    }
    fn grad_u(&self, p: Point2) -> [f64; 2] {
        let b = self.beta(p);
        let [gx, gy] = self.grad_g(p);
        [gx / b, gy / b]
    }
    fn f(&self, p: Point2) -> f64 {
        -self.laplacian_g(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_points(n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point2::new(rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99)))
            .collect()
    }

    #[test]
    fn rejects_non_positive_coefficients() {
        assert!(example1(0.0, 1.0).is_err());
        assert!(example1(1.0, -3.0).is_err());
        assert!(example1(1.0, f64::NAN).is_err());
    }

    #[test]
    fn point_values() {
        let p = example1(100.0, 1.0).unwrap();
        assert!((p.u(Point2::new(0.0, 0.0)) + 2.5e-3).abs() < 1e-18);
        assert!((p.u(Point2::new(0.9, 0.0)) - 0.56 * 0.19).abs() < 1e-15);
        for b in [(1.0, 100.0), (10000.0, 1.0)] {
            let p = example1(b.0, b.1).unwrap();
            assert_eq!(p.u(Point2::new(0.5, 0.0)), 0.0);
            for y in [-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_eq!(p.u(Point2::new(1.0, y)), 0.0);
                assert_eq!(p.u(Point2::new(-1.0, y)), 0.0);
                assert_eq!(p.u(Point2::new(y, 1.0)), 0.0);
            }
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let p = example1(1.0, 100.0).unwrap();
        let h = 1e-3;
        for q in random_points(100, 5) {
            let g = |dx: f64, dy: f64| p.g(Point2::new(q.x + dx, q.y + dy));
            let fd = (g(h, 0.0) + g(-h, 0.0) + g(0.0, h) + g(0.0, -h) - 4.0 * g(0.0, 0.0)) / (h * h);
            let exact = p.laplacian_g(q);
            assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd} vs {exact}");
            assert!((p.f(q) + exact).abs() == 0.0);
        }
    }

    #[test]
    fn load_is_independent_of_coefficients() {
        let a = example1(1.0, 100.0).unwrap();
        let b = example1(10000.0, 1.0).unwrap();
        for q in random_points(50, 6) {
            assert!((a.f(q) - b.f(q)).abs() <= 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_inside_each_subdomain() {
        let p = example1(1.0, 100.0).unwrap();
        let h = 1e-6;
        for q in random_points(200, 7) {
            let phi = p.circle.value(q);
            if phi.abs() < 1e-3 {
                continue;
            }
            let fx = (p.u(Point2::new(q.x + h, q.y)) - p.u(Point2::new(q.x - h, q.y))) / (2.0 * h);
            let fy = (p.u(Point2::new(q.x, q.y + h)) - p.u(Point2::new(q.x, q.y - h))) / (2.0 * h);
            let g = p.grad_u(q);
            let scale = g[0].hypot(g[1]).max(1e-3 / p.beta(q));
            assert!((g[0] - fx).abs() / scale <= 1e-6);
            assert!((g[1] - fy).abs() / scale <= 1e-6);
        }
    }

    #[test]
    fn solution_and_flux_are_continuous_across_the_circle() {
        let p = example1(1.0, 100.0).unwrap();
        for k in 0..32 {
            let th = k as f64 * std::f64::consts::TAU / 32.0;
            let n = Point2::new(th.cos(), th.sin());
            let eps = 1e-9;
            let out = n * (0.5 + eps);
            let inn = n * (0.5 - eps);
            assert!((p.u(out) - p.u(inn)).abs() < 1e-8);
            let flux = |q: Point2| {
                let g = p.grad_u(q);
                p.beta(q) * (g[0] * n.x + g[1] * n.y)
            };
            assert!((flux(out) - flux(inn)).abs() < 1e-7);
        }
    }
}
