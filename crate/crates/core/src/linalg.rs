//! Dense row-major linear algebra: LU with partial pivoting and the
//! symmetric eigenproblem (Householder tridiagonalization + implicit QL).
//!
//! Everything here is sized for desk-scale chains (a few thousand states).
//! Inner loops run over contiguous row slices so they vectorize.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{abs, hypot, sqrt};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::BadParams(alloc::format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Mutable row `i` together with shared row `j` (`i != j`).
    fn row_pair(&mut self, i: usize, j: usize) -> (&mut [f64], &[f64]) {
        debug_assert_ne!(i, j);
        let c = self.cols;
        if i < j {
            let (a, b) = self.data.split_at_mut(j * c);
            (&mut a[i * c..(i + 1) * c], &b[..c])
        } else {
            let (a, b) = self.data.split_at_mut(i * c);
            (&mut b[..c], &a[j * c..(j + 1) * c])
        }
    }

    /// Rows `i` and `i + 1`, both mutable.
    fn adjacent_rows_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let c = self.cols;
        let (a, b) = self.data[i * c..(i + 2) * c].split_at_mut(c);
        (a, b)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let c = self.cols;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (a, b) = self.data.split_at_mut(hi * c);
        a[lo * c..(lo + 1) * c].swap_with_slice(&mut b[..c]);
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik != 0.0 {
                    axpy(o, aik, other.row(k));
                }
            }
        }
        out
    }

    /// Row vector times matrix: `v^T * self`.
    pub fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(&mut out, vi, self.row(i));
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Principal submatrix on the given index set, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| {
                let d = abs(a - b);
                if d > m {
                    d
                } else {
                    m
                }
            })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators so the loop vectorizes without fast-math.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `y += alpha * x`
#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

const LU_BLOCK: usize = 64;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factor a square matrix. Fails when a pivot falls below
    /// `1e-13 * max|A|`.
    pub fn new(mut a: Matrix) -> Result<Self> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::BadParams("LU needs a square matrix".into()));
        }
        let scale = a.data.iter().fold(0.0f64, |m, x| m.max(abs(*x)));
        let tiny = 1e-13 * if scale > 0.0 { scale } else { 1.0 };
        let mut perm: Vec<usize> = (0..n).collect();

        let mut k0 = 0;
        while k0 < n {
            let kb = LU_BLOCK.min(n - k0);
            let kend = k0 + kb;
            // Panel factorization, columns k0..kend.
            for k in k0..kend {
                let mut p = k;
                let mut best = abs(a[(k, k)]);
                for i in k + 1..n {
                    let v = abs(a[(i, k)]);
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                if best <= tiny {
                    return Err(Error::SingularSolve(alloc::format!(
                        "pivot {best:e} in column {k}"
                    )));
                }
                a.swap_rows(k, p);
                perm.swap(k, p);
                let pivot = a[(k, k)];
                for i in k + 1..n {
                    let (ri, rk) = a.row_pair(i, k);
                    let l = ri[k] / pivot;
                    ri[k] = l;
                    if l != 0.0 {
                        axpy(&mut ri[k + 1..kend], -l, &rk[k + 1..kend]);
                    }
                }
            }
            if kend < n {
                // U12 = L11^{-1} A12
                for k in k0..kend {
                    for i in k + 1..kend {
                        let (ri, rk) = a.row_pair(i, k);
                        let l = ri[k];
                        if l != 0.0 {
                            axpy(&mut ri[kend..], -l, &rk[kend..]);
                        }
                    }
                }
                // A22 -= L21 U12
                for i in kend..n {
                    for p in k0..kend {
                        let (ri, rp) = a.row_pair(i, p);
                        let l = ri[p];
                        if l != 0.0 {
                            axpy(&mut ri[kend..], -l, &rp[kend..]);
                        }
                    }
                }
            }
            k0 = kend;
        }
        Ok(Lu { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let r = self.lu.row(i);
            x[i] -= dot(&r[..i], &x[..i]);
        }
        for i in (0..n).rev() {
            let r = self.lu.row(i);
            let s = dot(&r[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / r[i];
        }
        x
    }

    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.dim();
        assert_eq!(b.rows, n);
        let mut x = Matrix::zeros(n, b.cols);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l != 0.0 {
                    let (xi, xk) = x.row_pair(i, k);
                    axpy(xi, -l, xk);
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u != 0.0 {
                    let (xi, xk) = x.row_pair(i, k);
                    axpy(xi, -u, xk);
                }
            }
            let d = 1.0 / self.lu[(i, i)];
            x.row_mut(i).iter_mut().for_each(|v| *v *= d);
        }
        x
    }

    /// Solve `x^T A = b^T`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // A^T = U^T L^T P, so solve U^T y = b, L^T z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let yi = y[i] / self.lu[(i, i)];
            y[i] = yi;
            if yi != 0.0 {
                let r = &self.lu.row(i)[i + 1..];
                axpy(&mut y[i + 1..], -yi, r);
            }
        }
        for i in (0..n).rev() {
            let yi = y[i];
            if yi != 0.0 {
                let r = &self.lu.row(i)[..i];
                axpy(&mut y[..i], -yi, r);
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        self.solve_matrix(&Matrix::identity(self.dim()))
    }
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row `k` is the unit eigenvector for `values[k]` (absent when only
    /// eigenvalues were requested).
    pub vectors: Option<Matrix>,
}

impl SymmetricEigen {
    /// Full decomposition. The input must be symmetric; only symmetric
    /// input is meaningful.
    pub fn new(a: Matrix) -> Result<Self> {
        Self::compute(a, true)
    }

    pub fn values_only(a: Matrix) -> Result<Vec<f64>> {
        Ok(Self::compute(a, false)?.values)
    }

    fn compute(mut a: Matrix, want_vectors: bool) -> Result<Self> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::BadParams("eigensolver needs a square matrix".into()));
        }
        if n == 0 {
            return Ok(SymmetricEigen {
                values: Vec::new(),
                vectors: want_vectors.then(|| Matrix::zeros(0, 0)),
            });
        }
        let (mut d, mut e, taus) = tridiagonalize(&mut a);
        let mut w = if want_vectors {
            Some(accumulate_reflectors(&a, &taus))
        } else {
            None
        };
        tridiagonal_ql(&mut d, &mut e, w.as_mut())?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = w.map(|w| {
            let mut out = Matrix::zeros(n, n);
            for (k, &i) in order.iter().enumerate() {
                out.row_mut(k).copy_from_slice(w.row(i));
            }
            out
        });
        Ok(SymmetricEigen { values, vectors })
    }
}

/// Householder reduction `A = Q T Q^T` working on full symmetric storage.
///
/// Returns the diagonal and off-diagonal of `T` plus the reflector scalars;
/// reflector `k` is left in row `k` of `a`, entries `k+1..n`, with the
/// convention that `v_{k+1} = 1` is implicit.
fn tridiagonalize(a: &mut Matrix) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut taus = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let x = &a.row(k)[k + 1..];
        let alpha = x[0];
        let sigma = dot(&x[1..], &x[1..]);
        let (beta, tau) = if sigma == 0.0 {
            (alpha, 0.0)
        } else {
            let norm = sqrt(alpha * alpha + sigma);
            let beta = if alpha <= 0.0 { norm } else { -norm };
            let v0 = alpha - beta;
            v[k + 1] = 1.0;
            for (vi, xi) in v[k + 2..].iter_mut().zip(&x[1..]) {
                *vi = xi / v0;
            }
            (beta, (beta - alpha) / beta)
        };
        d[k] = a[(k, k)];
        e[k] = beta;
        taus[k] = tau;
        if tau == 0.0 {
            let row = a.row_mut(k);
            row[k + 1] = beta;
            continue;
        }
        // p = tau * A22 v
        for i in k + 1..n {
            p[i] = tau * dot(&a.row(i)[k + 1..], &v[k + 1..]);
        }
        // w = p - (tau/2)(p.v) v
        let pv = dot(&p[k + 1..], &v[k + 1..]);
        let c = 0.5 * tau * pv;
        for i in k + 1..n {
            p[i] -= c * v[i];
        }
        // A22 -= v w^T + w v^T
        for i in k + 1..n {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a.row_mut(i)[k + 1..];
            for ((r, &vj), &wj) in row.iter_mut().zip(&v[k + 1..]).zip(&p[k + 1..]) {
                *r -= vi * wj + wi * vj;
            }
        }
        let row = a.row_mut(k);
        row[k + 1..].copy_from_slice(&v[k + 1..]);
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)];
        e[n - 2] = a[(n - 2, n - 1)];
        d[n - 1] = a[(n - 1, n - 1)];
    } else {
        d[0] = a[(0, 0)];
    }
    (d, e, taus)
}

/// Builds `W = Q^T` from the stored reflectors (`Q^T = H_{n-3} ... H_0`).
fn accumulate_reflectors(a: &Matrix, taus: &[f64]) -> Matrix {
    let n = a.rows;
    let mut w = Matrix::identity(n);
    let mut u = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let tau = taus[k];
        if tau == 0.0 {
            continue;
        }
        let v = &a.row(k)[k + 1..];
        u.iter_mut().for_each(|x| *x = 0.0);
        for (off, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(&mut u, vi, w.row(k + 1 + off));
            }
        }
        for (off, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(w.row_mut(k + 1 + off), -tau * vi, &u);
            }
        }
    }
    w
}

/// Implicit QL on a symmetric tridiagonal matrix (`d` diagonal, `e[i]`
/// couples `i` and `i+1`, `e[n-1] = 0`). Rotations are applied to the rows
/// of `w`, so on exit row `i` of `w` is the eigenvector for `d[i]`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut w: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    const MAX_ITER: usize = 64;

    for l in 0..n {
        tst1 = tst1.max(abs(d[l]) + abs(e[l]));
        let mut m = l;
        while m < n {
            if abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (cur, next) = w.adjacent_rows_mut(i);
                        rotate_rows(next, cur, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Plane rotation of two rows: `next <- s*cur + c*next`, `cur <- c*cur - s*next`.
#[inline]
fn rotate_rows(next: &mut [f64], cur: &mut [f64], c: f64, s: f64) {
    for (a, b) in next.iter_mut().zip(cur.iter_mut()) {
        let h = *a;
        *a = s * *b + c * h;
        *b = c * *b - s * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym_from(vals: &[f64], n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i..n {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn lu_solves_small_system() {
        let a = Matrix::from_rows(&[
            alloc::vec![2.0, 1.0, 1.0],
            alloc::vec![4.0, -6.0, 0.0],
            alloc::vec![-2.0, 7.0, 2.0],
        ])
        .unwrap();
        let lu = Lu::new(a.clone()).unwrap();
        let x = lu.solve(&[5.0, -2.0, 9.0]);
        for (xi, want) in x.iter().zip([1.0, 1.0, 2.0]) {
            assert!((xi - want).abs() < 1e-12);
        }
        let y = lu.solve_transpose(&[1.0, 2.0, 3.0]);
        let back = a.vec_mul(&y);
        for (b, want) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Matrix::from_rows(&[alloc::vec![1.0, 2.0], alloc::vec![2.0, 4.0]]).unwrap();
        assert!(matches!(Lu::new(a), Err(Error::SingularSolve(_))));
    }

    #[test]
    fn blocked_lu_inverse_beyond_one_block() {
        let n = 150;
        let a = Matrix::from_fn(n, n, |i, j| {
            let x = ((i * 31 + j * 17) % 23) as f64 / 23.0;
            if i == j {
                x + 3.0
            } else {
                x - 0.5
            }
        });
        let inv = Lu::new(a.clone()).unwrap().inverse();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&Matrix::identity(n)) < 1e-10);
    }

    #[test]
    fn eigen_of_path_laplacian() {
        // tridiagonal [2,-1] has eigenvalues 2 - 2cos(k pi/(n+1))
        let n = 7;
        let a = Matrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let eig = SymmetricEigen::values_only(a).unwrap();
        for (k, v) in eig.iter().enumerate() {
            let want = 2.0 - 2.0 * libm::cos((k + 1) as f64 * crate::math::PI / (n + 1) as f64);
            assert!((v - want).abs() < 1e-12, "{k}: {v} vs {want}");
        }
    }

    #[test]
    fn eigen_handles_one_and_two_dims() {
        let e = SymmetricEigen::new(Matrix::from_rows(&[alloc::vec![3.0]]).unwrap()).unwrap();
        assert_eq!(e.values, alloc::vec![3.0]);
        let a = Matrix::from_rows(&[alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]]).unwrap();
        let e = SymmetricEigen::new(a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_symmetric_matrices(
            n in 1usize..24,
            vals in proptest::collection::vec(-1.0f64..1.0, 300),
        ) {
            let a = sym_from(&vals, n);
            let eig = SymmetricEigen::new(a.clone()).unwrap();
            let v = eig.vectors.unwrap();
            // orthonormal rows
            let vvt = v.matmul(&v.transpose());
            prop_assert!(vvt.max_abs_diff(&Matrix::identity(n)) < 1e-12);
            // A = V^T diag V
            let scaled = Matrix::from_fn(n, n, |i, j| eig.values[i] * v[(i, j)]);
            let rec = v.transpose().matmul(&scaled);
            prop_assert!(rec.max_abs_diff(&a) < 1e-12);
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }

        #[test]
        fn lu_residual_is_small(
            n in 1usize..80,
            vals in proptest::collection::vec(-1.0f64..1.0, 64),
        ) {
            let a = Matrix::from_fn(n, n, |i, j| {
                vals[(i * 7 + j * 3) % vals.len()] + if i == j { n as f64 } else { 0.0 }
            });
            let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
            let x = Lu::new(a.clone()).unwrap().solve(&b);
            let r = a.mul_vec(&x);
            for (ri, bi) in r.iter().zip(&b) {
                prop_assert!((ri - bi).abs() < 1e-10);
            }
        }
    }
}
