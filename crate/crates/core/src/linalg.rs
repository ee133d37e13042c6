//! Dense row-major matrices and the few kernels the iterations need.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps row-major `data`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `y = A x`.
    pub fn gemv(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `y = A' x`.
    pub fn gemv_t(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj += xi * a;
            }
        }
    }
}

/// Inner product with four independent accumulators; the summation order
/// is fixed, so results are reproducible.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let (ra, rb) = (chunks_a.remainder(), chunks_b.remainder());
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..4 {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Leading eigenpair of a symmetric operator by Lanczos with full
/// reorthogonalization. `apply(x, y)` must set `y = A x`.
///
/// Returns the largest Ritz value and its unit Ritz vector after at most
/// `steps` iterations (fewer if the Krylov space becomes invariant).
pub fn lanczos_top<A>(mut apply: A, start: &[f64], steps: usize) -> (f64, Vec<f64>)
where
    A: FnMut(&[f64], &mut [f64]),
{
    let n = start.len();
    let steps = steps.clamp(1, n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    let s = norm(start);
    let mut q: Vec<f64> = start.iter().map(|x| x / s).collect();
    let mut w = vec![0.0; n];
    for k in 0..steps {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        alpha.push(a);
        basis.push(q.clone());
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let bnorm = norm(&w);
        if k + 1 == steps || bnorm <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(bnorm);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / bnorm;
        }
    }

    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (top, _) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
    let coeffs = eig.eigenvectors.column(top);
    let mut v = vec![0.0; n];
    for (c, b) in coeffs.iter().zip(&basis) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += c * bi;
        }
    }
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    (eig.eigenvalues[top], v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemv_and_transpose() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut y = vec![0.0; 2];
        a.gemv(&[1.0, 0.0, -1.0], &mut y);
        assert_eq!(y, vec![-2.0, -2.0]);
        let mut z = vec![0.0; 3];
        a.gemv_t(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![5.0, 7.0, 9.0]);
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..11).map(f64::from).collect();
        assert_eq!(dot(&a, &a), 385.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn symmetry_check() {
        let mut a = DenseMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        assert!(a.is_symmetric());
        a.set(0, 2, 7.0);
        assert!(!a.is_symmetric());
        assert!(!DenseMatrix::zeros(2, 3).is_symmetric());
    }

    #[test]
    fn lanczos_finds_top_eigenpair() {
        let n = 50;
        // tridiagonal (-1, 2, -1): eigenvalues 2 - 2 cos(k pi / (n + 1))
        let a = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        let (lam, v) = lanczos_top(|x, y| a.gemv(x, y), &start, n);
        let want = 2.0 - 2.0 * (n as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((lam - want).abs() < 1e-10);
        let mut av = vec![0.0; n];
        a.gemv(&v, &mut av);
        let resid: f64 = av.iter().zip(&v).map(|(x, y)| (x - lam * y).powi(2)).sum();
        assert!(resid.sqrt() < 1e-8);
    }

    #[test]
    fn lanczos_stops_on_invariant_subspace() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| if i == j { [3.0, 1.0, 1.0][i] } else { 0.0 });
        let (lam, v) = lanczos_top(|x, y| a.gemv(x, y), &[1.0, 1.0, 1.0], 10);
        assert!((lam - 3.0).abs() < 1e-12);
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
    }
}
