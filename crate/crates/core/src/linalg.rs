//! Dense real linear algebra.
//!
//! Everything here works on row-major [`DenseMatrix`] values. Operators that
//! are self-adjoint in a weighted inner product `<x, y>_w = sum x_i y_i w_i`
//! are handled by the similarity `diag(sqrt(w)) M diag(1/sqrt(w))`, which turns
//! them into ordinary symmetric matrices, so only one symmetric eigensolver is
//! needed.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Products above this many multiply-adds are split across threads.
const PAR_WORK_THRESHOLD: usize = 1 << 22;

/// Above this dimension the weighted spectral radius uses power iteration.
const POWER_ITERATION_DIM: usize = 1500;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
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

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major storage, rejecting non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Rank-one matrix `u v^T`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(Error::Dimension("ragged columns".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| columns[j][i]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &x) in self.row(i).iter().enumerate() {
                t.data[j * self.rows + i] = x;
            }
        }
        t
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(DenseMatrix { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix { data, ..*self })
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseMatrix {
            data: self.data.iter().map(|a| a * s).collect(),
            ..*self
        }
    }

    /// `I - self`; the matrix must be square.
    pub fn identity_minus(&self) -> Self {
        let mut m = self.scale(-1.0);
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += 1.0;
        }
        m
    }

    /// `diag(d) * self`
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut m = self.clone();
        for (i, &s) in d.iter().enumerate().take(self.rows) {
            m.row_mut(i).iter_mut().for_each(|x| *x *= s);
        }
        m
    }

    /// `self * diag(d)`
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows {
            m.row_mut(i).iter_mut().zip(d).for_each(|(x, s)| *x *= s);
        }
        m
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest absolute entry of `self - self^T`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T * self`
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "vecmat dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut out);
            }
        }
        out
    }

    /// Matrix product. Zero entries of `self` are skipped, so products with
    /// sparse transition matrices stay cheap.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        if other.cols == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [f64])| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        };
        if self.rows * self.cols * other.cols > PAR_WORK_THRESHOLD {
            out.data.par_chunks_mut(other.cols).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(other.cols).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Strictly positive weights defining the inner product `<x, y>_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(WeightVector(weights))
    }

    /// Unit weights (the Euclidean inner product).
    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    /// Entrywise reciprocal: the weights of the dual inner product.
    pub fn reciprocal(&self) -> Self {
        WeightVector(self.0.iter().map(|w| 1.0 / w).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn sqrt(&self) -> Vec<f64> {
        self.0.iter().map(|w| w.sqrt()).collect()
    }
}

pub fn weighted_inner(x: &[f64], y: &[f64], w: &WeightVector) -> Result<f64> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::Dimension(format!(
            "inner product of lengths {}, {} with {} weights",
            x.len(),
            y.len(),
            w.len()
        )));
    }
    Ok(x.iter().zip(y).zip(&w.0).map(|((a, b), c)| a * b * c).sum())
}

pub fn weighted_norm(x: &[f64], w: &WeightVector) -> Result<f64> {
    weighted_inner(x, x, w).map(f64::sqrt)
}

/// Adjoint of `m` in the inner product weighted by `w`: `diag(1/w) m^T diag(w)`.
pub fn weighted_adjoint(m: &DenseMatrix, w: &WeightVector) -> Result<DenseMatrix> {
    if !m.is_square() || m.rows() != w.len() {
        return Err(Error::Dimension("adjoint needs a square matrix matching the weights".into()));
    }
    let inv: Vec<f64> = w.0.iter().map(|x| 1.0 / x).collect();
    Ok(m.transpose().scale_rows(&inv).scale_cols(&w.0))
}

/// Induced operator norm in the inner product weighted by `w`, computed as the
/// square root of the spectral radius of `m^* m`.
pub fn weighted_operator_norm(m: &DenseMatrix, w: &WeightVector) -> Result<f64> {
    let gram = weighted_adjoint(m, w)?.matmul(m)?;
    Ok(spectral_radius_symmetric_psd(&gram, w)?.max(0.0).sqrt())
}

/// `diag(sqrt(w)) m diag(1/sqrt(w))`
pub fn symmetrize_weighted(m: &DenseMatrix, w: &WeightVector) -> DenseMatrix {
    let s = w.sqrt();
    let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
    m.scale_rows(&s).scale_cols(&inv)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    lu: DenseMatrix,
    perm: Vec<usize>,
    sign: f64,
    min_pivot: f64,
    max_abs: f64,
}

impl LuFactorization {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax < 1e-300 {
                return Err(Error::SingularMatrix { pivot: pmax });
            }
            min_pivot = min_pivot.min(pmax);
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let (top, bottom) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..];
            let pivot = pivot_row[k];
            for row in bottom.chunks_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (x, &y) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= factor * y;
                    }
                }
            }
        }
        Ok(LuFactorization {
            lu,
            perm,
            sign,
            min_pivot: if n == 0 { 0.0 } else { min_pivot },
            max_abs: a.max_abs(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Smallest pivot magnitude relative to the largest entry of the input.
    pub fn min_pivot_ratio(&self) -> f64 {
        if self.max_abs == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_abs
        }
    }

    pub fn determinant(&self) -> f64 {
        self.lu.diagonal().iter().product::<f64>() * self.sign
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, expected {}",
                b.rows(),
                n
            )));
        }
        let m = b.cols();
        if m == 0 {
            return Ok(b.clone());
        }
        let mut x = DenseMatrix::zeros(n, m);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        // Forward substitution with unit lower factor, then back substitution.
        for i in 0..n {
            let (done, rest) = x.data.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l != 0.0 {
                    axpy(-l, &done[k * m..(k + 1) * m], xi);
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.data.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in (i + 1)..n {
                let u = self.lu[(i, k)];
                if u != 0.0 {
                    axpy(-u, &tail[(k - i - 1) * m..(k - i) * m], xi);
                }
            }
            let d = self.lu[(i, i)];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = DenseMatrix::from_row_major(b.len(), 1, b.to_vec())?;
        Ok(self.solve(&rhs)?.into_vec())
    }
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    LuFactorization::new(a)?.solve(b)
}

/// Unit vector spanning the null space of a matrix of nullity one.
///
/// Householder QR of `A^T = Q R`; the last column of `Q` is annihilated by `A`
/// up to the last diagonal entry of `R`.
pub fn qr_null_vector(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension("null vector needs a square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if n == 1 {
        if a[(0, 0)] != 0.0 {
            return Err(Error::SingularMatrix { pivot: a[(0, 0)] });
        }
        return Ok(vec![1.0]);
    }
    let scale = a.frobenius_norm();
    let mut r = a.transpose();
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(n - 1);
    let mut rdiag = vec![0.0; n];
    for k in 0..n {
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // |R_kk| equals the norm of the remaining column.
        rdiag[k] = alpha;
        if k == n - 1 || alpha == 0.0 {
            continue;
        }
        let beta = if v[0] > 0.0 { -alpha } else { alpha };
        v[0] -= beta;
        let vtv = dot(&v, &v);
        let tau = 2.0 / vtv;
        // R[k.., k..] -= tau v (v^T R[k.., k..])
        let mut w = vec![0.0; n - k];
        for (vi, i) in v.iter().zip(k..n) {
            axpy(*vi, &r.row(i)[k..], &mut w);
        }
        for (vi, i) in v.iter().zip(k..n) {
            axpy(-tau * vi, &w, &mut r.row_mut(i)[k..]);
        }
        reflectors.push((k, v, tau));
    }
    let mut sorted = rdiag.clone();
    sorted.sort_by(f64::total_cmp);
    let tol = 1e-10 * scale;
    if sorted[0] <= tol && sorted[1] <= tol {
        return Err(Error::AmbiguousNullspace);
    }
    // q = H_0 H_1 ... H_{n-2} e_{n-1}
    let mut q = vec![0.0; n];
    q[n - 1] = 1.0;
    for (k, v, tau) in reflectors.iter().rev() {
        let s = tau * dot(v, &q[*k..]);
        axpy(-s, v, &mut q[*k..]);
    }
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    Ok(q)
}

/// Eigenvalues (descending) with the corresponding eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Full eigendecomposition of a symmetric matrix by Householder
/// tridiagonalization followed by implicit-shift QL.
pub fn sym_eigs(s: &DenseMatrix) -> Result<EigenPairs> {
    let (values, vectors) = sym_decompose(s, true)?;
    Ok(EigenPairs {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues of a symmetric matrix in descending order, without vectors.
pub fn sym_eigvals(s: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(sym_decompose(s, false)?.0)
}

fn sym_decompose(s: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    if !s.is_square() {
        return Err(Error::Dimension("eigendecomposition needs a square matrix".into()));
    }
    let asym = s.max_asymmetry();
    if asym > 1e-12 * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = s.rows();
    if n == 0 {
        return Ok((vec![], want_vectors.then(|| DenseMatrix::zeros(0, 0))));
    }
    // Work on the transpose so the O(n^3) loops run along rows.
    let mut w = s.transpose();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut w, &mut d, &mut e, want_vectors);
    tridiagonal_ql(want_vectors.then_some(&mut w), &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = want_vectors.then(|| DenseMatrix::from_fn(n, n, |i, j| w[(order[j], i)]));
    Ok((values, vectors))
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// `w` holds the transpose of the accumulating orthogonal factor; on return
/// its rows are the basis vectors of the tridiagonal frame. Without
/// `accumulate` only `d` and `e` are meaningful on return.
fn tridiagonalize(w: &mut DenseMatrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = w[(j, n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[(j, i - 1)];
                w[(j, i)] = 0.0;
                w[(i, j)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                w[(i, j)] = f;
                g = e[j] + w[(j, j)] * f;
                let row = &w.row(j)[j + 1..i];
                for (k, &wjk) in (j + 1..i).zip(row) {
                    g += wjk * d[k];
                    e[k] += wjk * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let row = &mut w.row_mut(j)[j..i];
                for ((x, &ek), &dk) in row.iter_mut().zip(&e[j..i]).zip(&d[j..i]) {
                    *x -= f * ek + g * dk;
                }
                d[j] = w[(j, i - 1)];
                w[(j, i)] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = w[(j, j)];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n.saturating_sub(1) {
        let wii = w[(i, i)];
        w[(i, n - 1)] = wii;
        w[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            let col: Vec<f64> = w.row(i + 1)[..=i].to_vec();
            for k in 0..=i {
                d[k] = col[k] / h;
            }
            for j in 0..=i {
                let g = dot(&col, &w.row(j)[..=i]);
                axpy(-g, &d[..=i], &mut w.row_mut(j)[..=i]);
            }
        }
        w.row_mut(i + 1)[..=i].iter_mut().for_each(|x| *x = 0.0);
    }
    for j in 0..n {
        d[j] = w[(j, n - 1)];
        w[(j, n - 1)] = 0.0;
    }
    w[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, rotating the rows of `w`
/// when given.
fn tridiagonal_ql(mut w: Option<&mut DenseMatrix>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 30 * n.max(1);
    let mut total = 0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                total += 1;
                if total > max_iter {
                    return Err(Error::EigenConvergence { iterations: total });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
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
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (lo, hi) = w.data.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_next = &mut hi[..n];
                        for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// All eigenvalues of a general real matrix, sorted by descending modulus.
///
/// Diagonal balancing, Householder reduction to Hessenberg form, then the
/// Francis double-shift QR iteration.
pub fn general_eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    let n = a.rows();
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let mut vals = hessenberg_qr(&mut h)?;
    vals.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    debug_assert_eq!(vals.len(), n);
    Ok(vals)
}

/// Spectral radius of a general matrix.
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    Ok(general_eigenvalues(a)?.first().map_or(0.0, |z| z.norm()))
}

/// Diagonal similarity scaling (Parlett-Reinsch) with powers of two.
fn balance(h: &mut DenseMatrix) {
    let n = h.rows();
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[(j, i)].abs();
                    r += h[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                h.row_mut(i).iter_mut().for_each(|x| *x *= g);
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place orthogonal reduction to upper Hessenberg form.
fn hessenberg(h: &mut DenseMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let mut f = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hsum = 0.0;
        for i in (m..n).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hsum += ort[i] * ort[i];
        }
        let mut g = hsum.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hsum -= ort[m] * g;
        ort[m] -= g;
        // H <- (I - u u^T / h) H
        f[m..].iter_mut().for_each(|x| *x = 0.0);
        for i in m..n {
            axpy(ort[i], &h.row(i)[m..], &mut f[m..]);
        }
        f[m..].iter_mut().for_each(|x| *x /= hsum);
        for i in m..n {
            let oi = ort[i];
            axpy(-oi, &f[m..], &mut h.row_mut(i)[m..]);
        }
        // H <- H (I - u u^T / h)
        for i in 0..n {
            let row = h.row_mut(i);
            let s = dot(&row[m..], &ort[m..]) / hsum;
            axpy(-s, &ort[m..], &mut row[m..]);
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR,
/// updating only the active window.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    if nn == 0 {
        return Ok(vec![]);
    }
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let max_total = 100 * nn;
    let mut total = 0usize;
    let mut iter = 0;
    let mut n = nn as isize - 1;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut x, mut y, mut w);
    while n >= 0 {
        let nu = n as usize;
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }
        if l == nu {
            wr[nu] = h[(nu, nu)] + exshift;
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > max_total {
                return Err(Error::EigenConvergence { iterations: total });
            }
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    // Row modification.
                    for j in k..=nu {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    // Column modification.
                    for i in l..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Largest eigenvalue magnitude of an operator self-adjoint in `<., .>_w`.
///
/// The operator is symmetrized by `diag(sqrt(w))`; small problems use the
/// dense symmetric solver and large ones power iteration.
pub fn spectral_radius_symmetric_psd(s: &DenseMatrix, w: &WeightVector) -> Result<f64> {
    if !s.is_square() || s.rows() != w.len() {
        return Err(Error::Dimension("operator and weights disagree".into()));
    }
    let b = symmetrize_weighted(s, w);
    let asym = b.max_asymmetry();
    if asym > 1e-10 * b.max_abs().max(1.0) {
        return Err(Error::NotSelfAdjoint { asymmetry: asym });
    }
    let n = b.rows();
    let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (b[(i, j)] + b[(j, i)]));
    if n > POWER_ITERATION_DIM {
        if let Some(rho) = power_iteration_symmetric(&sym, 1e-12, 20_000) {
            return Ok(rho);
        }
    }
    let eig = sym_eigs(&sym)?;
    Ok(eig
        .values
        .first()
        .map_or(0.0, |&top| top.abs().max(eig.values.last().unwrap().abs())))
}

/// Dominant eigenvalue magnitude of a symmetric matrix, or `None` if the
/// iteration stalls.
fn power_iteration_symmetric(s: &DenseMatrix, rel_tol: f64, max_iter: usize) -> Option<f64> {
    let n = s.rows();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * ((i * 7919) % 101) as f64).collect();
    let nx = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let mut theta_prev = f64::NAN;
    for _ in 0..max_iter {
        let y: Vec<f64> = (0..n).into_par_iter().map(|i| dot(s.row(i), &x)).collect();
        let theta = dot(&x, &y);
        let ny = dot(&y, &y).sqrt();
        if ny == 0.0 {
            return Some(0.0);
        }
        let residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if (theta - theta_prev).abs() <= rel_tol * theta.abs() && residual <= 1e-6 * theta.abs() {
            return Some(theta.abs());
        }
        theta_prev = theta;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random_matrix(n: usize, m: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        DenseMatrix::from_fn(n, m, |_, _| lcg(&mut s))
    }

    #[test]
    fn inner_product_examples() {
        let w = WeightVector::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(weighted_inner(&[1.0, 0.0], &[0.0, 1.0], &w).unwrap(), 0.0);
        assert_eq!(weighted_inner(&[1.0, 1.0], &[1.0, 1.0], &w).unwrap(), 5.0);
        let mu = vec![0.2, 0.5, 0.3];
        let inv = WeightVector::new(mu.clone()).unwrap().reciprocal();
        assert!((weighted_inner(&mu, &mu, &inv).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            weighted_inner(&[1.0], &[1.0, 2.0], &w),
            Err(Error::Dimension(_))
        ));
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn lu_examples() {
        let b = random_matrix(3, 2, 1);
        let x = lu_solve(&DenseMatrix::identity(3), &b).unwrap();
        assert!(x.max_abs_diff(&b) < 1e-15);
        let a = DenseMatrix::from_diag(&[2.0, 4.0]);
        let rhs = DenseMatrix::from_rows(&[vec![2.0], vec![4.0]]).unwrap();
        assert_eq!(lu_solve(&a, &rhs).unwrap().into_vec(), vec![1.0, 1.0]);
    }

    #[test]
    fn lu_recovers_constructed_solution() {
        let a = random_matrix(10, 10, 7).add(&DenseMatrix::identity(10)).unwrap();
        let x = random_matrix(10, 3, 8);
        let b = a.matmul(&x).unwrap();
        let solved = lu_solve(&a, &b).unwrap();
        assert!(solved.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            lu_solve(&a, &DenseMatrix::identity(2)),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn null_vector_of_symmetric_doubly_stochastic() {
        let c = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let v = qr_null_vector(&c.identity_minus()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].abs() - s).abs() < 1e-12 && (v[1].abs() - s).abs() < 1e-12);
        assert!(v[0] * v[1] > 0.0);
    }

    #[test]
    fn null_vector_rejects_nullity_two() {
        let z = DenseMatrix::identity(3).identity_minus();
        assert!(matches!(qr_null_vector(&z), Err(Error::AmbiguousNullspace)));
    }

    #[test]
    fn null_vector_residual_is_small() {
        // I - P for a random positive column-stochastic P.
        let mut s = 3u64;
        let n = 12;
        let mut p = DenseMatrix::from_fn(n, n, |_, _| lcg(&mut s) + 0.6);
        for j in 0..n {
            let sum: f64 = (0..n).map(|i| p[(i, j)]).sum();
            for i in 0..n {
                p[(i, j)] /= sum;
            }
        }
        let a = p.identity_minus();
        let v = qr_null_vector(&a).unwrap();
        let r = a.matvec(&v);
        assert!(dot(&r, &r).sqrt() <= 1e-8 * a.frobenius_norm());
        assert!(v.iter().all(|&x| x * v[0] > 0.0));
    }

    #[test]
    fn sym_eigs_examples() {
        let e = sym_eigs(&DenseMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert!((e.vectors[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(2, 1)].abs() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(1, 2)].abs() - 1.0).abs() < 1e-15);
        let r = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eigs(&r).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);
        let bad = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(sym_eigs(&bad), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn sym_eigs_reconstructs() {
        let a = random_matrix(20, 20, 11);
        let s = a.add(&a.transpose()).unwrap();
        let e = sym_eigs(&s).unwrap();
        let v = &e.vectors;
        let rebuilt = v
            .scale_cols(&e.values)
            .matmul(&v.transpose())
            .unwrap();
        assert!(rebuilt.max_abs_diff(&s) < 1e-8);
        let gram = v.transpose().matmul(v).unwrap();
        assert!(gram.max_abs_diff(&DenseMatrix::identity(20)) < 1e-9);
        let values = sym_eigvals(&s).unwrap();
        for (a, b) in values.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-10);
        }
        for k in 0..20 {
            let col = v.column(k);
            let r: Vec<f64> = s
                .matvec(&col)
                .iter()
                .zip(&col)
                .map(|(a, b)| a - e.values[k] * b)
                .collect();
            assert!(dot(&r, &r).sqrt() <= 1e-9 * s.frobenius_norm());
        }
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn general_eigenvalues_of_three_cycle() {
        let w = DenseMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let vals = general_eigenvalues(&w).unwrap();
        for z in &vals {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(3) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let re: f64 = vals.iter().map(|z| z.re).sum();
        assert!(re.abs() < 1e-12);
    }

    #[test]
    fn general_eigenvalues_triangular() {
        let t = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 2.0],
            vec![0.0, -2.0, 3.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let vals = general_eigenvalues(&t).unwrap();
        let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        assert!((re[0] - 4.0).abs() < 1e-12);
        assert!((re[1] + 2.0).abs() < 1e-12);
        assert!((re[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_product_matches_determinant() {
        let a = random_matrix(15, 15, 21);
        let det = LuFactorization::new(&a).unwrap().determinant();
        let prod = general_eigenvalues(&a)
            .unwrap()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z);
        assert!((prod.re - det).abs() <= 1e-6 * det.abs());
        assert!(prod.im.abs() <= 1e-6 * det.abs());
    }

    #[test]
    fn general_matches_symmetric_on_symmetric_input() {
        let a = random_matrix(25, 25, 5);
        let s = a.add(&a.transpose()).unwrap();
        let sym = sym_eigs(&s).unwrap().values;
        let mut gen: Vec<f64> = general_eigenvalues(&s).unwrap().iter().map(|z| z.re).collect();
        gen.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in sym.iter().zip(&gen) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn weighted_spectral_radius_examples() {
        let w = WeightVector::new(vec![0.5, 2.0, 3.0]).unwrap();
        assert!((spectral_radius_symmetric_psd(&DenseMatrix::identity(3), &w).unwrap() - 1.0).abs() < 1e-14);
        // Projection onto span(v) orthogonal in <.,.>_w: v v^T diag(w) / <v,v>_w.
        let v = [1.0, -1.0, 2.0];
        let vv = weighted_inner(&v, &v, &w).unwrap();
        let proj = DenseMatrix::outer(&v, &v).scale_cols(w.as_slice()).scale(1.0 / vv);
        assert!((spectral_radius_symmetric_psd(&proj, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_spectral_radius_matches_general_solver() {
        let n = 30;
        let mut s = 99u64;
        let weights: Vec<f64> = (0..n).map(|_| 0.6 + lcg(&mut s)).collect();
        let w = WeightVector::new(weights).unwrap();
        let a = random_matrix(n, n, 4);
        let sym = a.add(&a.transpose()).unwrap();
        // diag(1/sqrt(w)) sym diag(sqrt(w)) is self-adjoint in <.,.>_w.
        let sq: Vec<f64> = w.as_slice().iter().map(|x| x.sqrt()).collect();
        let inv: Vec<f64> = sq.iter().map(|x| 1.0 / x).collect();
        let op = sym.scale_rows(&inv).scale_cols(&sq);
        let rho = spectral_radius_symmetric_psd(&op, &w).unwrap();
        let reference = spectral_radius(&op).unwrap();
        assert!((rho - reference).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_agrees_with_dense_solver() {
        let a = random_matrix(40, 40, 17);
        let s = a.matmul(&a.transpose()).unwrap();
        let dense = sym_eigs(&s).unwrap().values[0];
        let power = power_iteration_symmetric(&s, 1e-12, 100_000).unwrap();
        assert!((dense - power).abs() < 1e-9 * dense);
    }

    #[test]
    fn weighted_norm_duality() {
        let n = 8;
        let mut s = 5u64;
        let w = WeightVector::new((0..n).map(|_| 0.6 + lcg(&mut s)).collect()).unwrap();
        for seed in 0..5 {
            let m = random_matrix(n, n, 100 + seed);
            let lhs = weighted_operator_norm(&m, &w.reciprocal()).unwrap();
            let rhs = weighted_operator_norm(&m.transpose(), &w).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }
}
