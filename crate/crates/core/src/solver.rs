//! Compressed-row sparse matrices and a Jacobi-preconditioned conjugate gradient solver.

use rayon::prelude::*;
use thiserror::Error;

/// Largest system accepted by the dense Cholesky fallback.
pub const DENSE_LIMIT: usize = 2000;

/// Rows below this count are multiplied sequentially.
const PARALLEL_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x||_2 / ||b||_2` of the returned iterate.
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("CG did not converge: {} iterations, relative residual {:e}", .0.iterations, .0.final_residual)]
    NotConverged(SolveStats),
    #[error("non-positive diagonal entry {value:e} in row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has length {len}")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
    #[error("dense fallback limited to {limit} unknowns, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in input order, so equal inputs give bit-identical matrices.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        // stable: equal (row, col) keep their relative order
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(n_rows, n_cols, triplets)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let row = |i: usize| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<f64>()
        };
        if self.n_rows >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `20 sqrt(n) + 200`
pub fn default_max_iter(n: usize) -> usize {
    (20.0 * (n as f64).sqrt()).ceil() as usize + 200
}

/// Solve `A x = b` from `x = 0`.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats), SolverError> {
    let x0 = vec![0.0; b.len()];
    solve_spd_from(a, b, x0, tol, max_iter, |_, _| {})
}

/// Preconditioned CG from the initial guess `x0`; `monitor(k, x_k)` sees every iterate.
///
/// Convergence is declared on the true residual `b - A x`; when the recurrence residual
/// drifts below the target early, the residual is recomputed and the iteration restarts.
pub fn solve_spd_from<M: FnMut(usize, &[f64])>(
    a: &CsrMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
    mut monitor: M,
) -> Result<(Vec<f64>, SolveStats), SolverError> {
    let n = a.n_rows;
    if a.n_cols != n || b.len() != n || x.len() != n {
        return Err(SolverError::DimensionMismatch {
            rows: a.n_rows,
            cols: a.n_cols,
            len: b.len(),
        });
    }
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(SolverError::NonPositiveDiagonal { row, value });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                final_residual: 0.0,
            },
        ));
    }
    let target = tol * b_norm;

    let mut ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    monitor(0, &x);

    loop {
        let r_norm = norm(&r);
        if r_norm <= target {
            a.mul_vec_into(&x, &mut ax);
            r.iter_mut()
                .zip(b.iter().zip(&ax))
                .for_each(|(r, (b, a))| *r = b - a);
            let true_norm = norm(&r);
            if true_norm <= target {
                return Ok((
                    x,
                    SolveStats {
                        iterations,
                        final_residual: true_norm / b_norm,
                    },
                ));
            }
            // restart from the true residual
            z.iter_mut().zip(r.iter().zip(&inv_diag)).for_each(|(z, (r, d))| *z = r * d);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            a.mul_vec_into(&x, &mut ax);
            let res: f64 = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
            return Err(SolverError::NotConverged(SolveStats {
                iterations,
                final_residual: res / b_norm,
            }));
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolverError::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        z.iter_mut().zip(r.iter().zip(&inv_diag)).for_each(|(z, (r, d))| *z = r * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        iterations += 1;
        monitor(iterations, &x);
    }
}

/// Dense Cholesky solve, used as a reference for small systems.
pub fn solve_dense(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = a.n_rows;
    if n > DENSE_LIMIT {
        return Err(SolverError::TooLarge { n, limit: DENSE_LIMIT });
    }
    if a.n_cols != n || b.len() != n {
        return Err(SolverError::DimensionMismatch {
            rows: a.n_rows,
            cols: a.n_cols,
            len: b.len(),
        });
    }
    let chol = a.to_dense().cholesky().ok_or(SolverError::NotPositiveDefinite)?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}
