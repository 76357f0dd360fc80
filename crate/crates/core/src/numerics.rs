//! Dense real linear algebra for the small matrices that show up here:
//! channels, the polytope constraint matrix, and the normalized joint `Q`.
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration and the symmetric
//! eigensolver is cyclic Jacobi. Both are slow for large inputs but accurate
//! to working precision on the small dimensions these alphabets produce,
//! which matters because null-space membership is decided by comparing
//! singular values against a relative tolerance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::{hypot, sqrt};

/// Default relative tolerance below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Entries must be finite and
    /// both dimensions positive.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::invalid("rows have different lengths"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Matrix::new(rows.len(), cols, data)
    }

    /// Builds a matrix whose columns are the given vectors. The result may
    /// have zero columns; this is how empty bases are represented.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            debug_assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    /// All-zero matrix. Zero-sized dimensions are allowed.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, jj)] = self[(i, j)];
            }
        }
        m
    }

    /// Submatrix made of the first `k` rows.
    pub fn leading_rows(&self, k: usize) -> Matrix {
        Matrix {
            rows: k,
            cols: self.cols,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self * diag(d)`: scales column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[f64]) -> Matrix {
        assert_eq!(self.cols, d.len());
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] *= d[j];
            }
        }
        m
    }

    /// `diag(d) * self`: scales row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> Matrix {
        assert_eq!(self.rows, d.len());
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] *= d[i];
            }
        }
        m
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
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

/// Singular value decomposition `M = U Σ Vᵀ`.
///
/// `singular_values` has one entry per column of `M`, sorted nonincreasing;
/// `right_vectors` is the full `cols × cols` orthogonal factor, so its
/// trailing columns span the null space. `left_vectors` is `rows × min(rows,
/// cols)` with orthonormal columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left_vectors: Matrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: Matrix,
}

impl Svd {
    /// Multiplies the factors back together.
    pub fn reconstruct(&self) -> Matrix {
        let k = self.left_vectors.cols();
        let sigma: Vec<f64> = self.singular_values[..k].to_vec();
        let us = self.left_vectors.scale_columns(&sigma);
        let vk = self
            .right_vectors
            .select_columns(&(0..k).collect::<Vec<_>>());
        us.matmul(&vk.transpose())
    }

    /// Number of singular values above `rank_tol * σ₁`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        if s1 == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&s| s > rank_tol * s1)
            .count()
    }
}

pub fn svd(m: &Matrix) -> Result<Svd> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = m.clone();
    let mut v = Matrix::identity(cols);
    let cap = 100 * rows.max(cols);
    let mut converged = cols < 2;
    // columns shorter than this are numerically zero; rotating them only
    // shuffles rounding noise and would never meet the relative test
    let dim_eps = f64::EPSILON * rows.max(cols) as f64;
    let negligible = {
        let f = dim_eps * sqrt(m.as_slice().iter().map(|x| x * x).sum());
        f * f
    };

    for _ in 0..cap {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (a, b) = (w[(i, p)], w[(i, q)]);
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= dim_eps * sqrt(alpha) * sqrt(beta)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + hypot(1.0, zeta));
                let c = 1.0 / hypot(1.0, t);
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "SVD of a {rows}x{cols} matrix did not converge within {cap} sweeps"
        )));
    }

    let norms: Vec<f64> = (0..cols)
        .map(|j| sqrt((0..rows).map(|i| w[(i, j)] * w[(i, j)]).sum()))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let right_vectors = v.select_columns(&order);

    let k = rows.min(cols);
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let floor = smax * f64::EPSILON * rows.max(cols) as f64;
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().take(k).enumerate() {
        let s = norms[j];
        if s > floor && s > 0.0 {
            left.push((0..rows).map(|i| w[(i, j)] / s).collect());
        } else {
            left.push(Vec::new());
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        complete_orthonormal(&mut left, &missing, rows);
    }

    Ok(Svd {
        left_vectors: Matrix::from_columns(rows, &left),
        singular_values,
        right_vectors,
    })
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let (a, b) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

/// Fills the empty slots of `basis` with unit vectors orthogonal to every
/// other slot, drawing candidates from the standard basis.
fn complete_orthonormal(basis: &mut [Vec<f64>], missing: &[usize], dim: usize) {
    let mut candidate = 0;
    for &slot in missing {
        loop {
            assert!(candidate < dim, "cannot complete an orthonormal basis");
            let mut x = vec![0.0; dim];
            x[candidate] = 1.0;
            candidate += 1;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for other in basis.iter().filter(|b| !b.is_empty()) {
                    let d: f64 = other.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, oi) in x.iter_mut().zip(other) {
                        *xi -= d * oi;
                    }
                }
            }
            let n = sqrt(x.iter().map(|v| v * v).sum());
            if n > 0.5 {
                basis[slot] = x.into_iter().map(|v| v / n).collect();
                break;
            }
        }
    }
}

/// Orthonormal basis (as columns) of `{z : M z = 0}`.
///
/// A right singular vector belongs to the null space when its singular value
/// is at most `rank_tol * σ₁`. The result has `cols(M)` rows and possibly
/// zero columns.
pub fn null_space(m: &Matrix, rank_tol: f64) -> Result<Matrix> {
    if !(rank_tol > 0.0) {
        return Err(Error::contract("rank_tol must be positive"));
    }
    let svd = svd(m)?;
    let rank = svd.rank(rank_tol);
    let idx: Vec<usize> = (rank..m.cols()).collect();
    Ok(svd.right_vectors.select_columns(&idx))
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Sorted nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

pub fn symmetric_eigen(m: &Matrix) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::contract("symmetric_eigen needs a square matrix"));
    }
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::contract(format!(
                    "matrix is not symmetric: entries ({i},{j}) and ({j},{i}) differ by {:e}",
                    (m[(i, j)] - m[(j, i)]).abs()
                )));
            }
        }
    }

    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let frob = sqrt(m.as_slice().iter().map(|x| x * x).sum());
    let skip = 1e-18 * frob;
    let cap = 100 * n.max(1);
    let mut converged = n < 2;

    for _ in 0..cap {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + hypot(1.0, theta));
                let c = 1.0 / hypot(1.0, t);
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * x - s * y;
                    a[(q, k)] = s * x + c * y;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge within {cap} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    Ok(SymmetricEigen {
        eigenvalues: order.iter().map(|&i| a[(i, i)]).collect(),
        eigenvectors: v.select_columns(&order),
    })
}

/// Orthonormal basis (as columns) of the complement of `{x}`, i.e. of
/// `{z : xᵀ z = 0}`.
pub fn orthogonal_complement(x: &[f64]) -> Result<Matrix> {
    let row = Matrix::new(1, x.len(), x.to_vec())?;
    null_space(&row, DEFAULT_RANK_TOL)
}

/// Largest value of `wᵀ N w / wᵀ D w` over nonzero `w`, for symmetric `N` and
/// positive semidefinite `D`. Returns `None` when `D` is singular (the ratio
/// is unbounded along its null directions unless `N` vanishes there too,
/// which the callers never need to distinguish).
pub(crate) fn max_generalized_rayleigh(num: &Matrix, den: &Matrix) -> Result<Option<f64>> {
    let eig = symmetric_eigen(den)?;
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if eig
        .eigenvalues
        .iter()
        .any(|&l| l <= 1e-12 * top.max(f64::MIN_POSITIVE))
    {
        return Ok(None);
    }
    // T = Λ^{-1/2} Vᵀ N V Λ^{-1/2}
    let inv_sqrt: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / sqrt(l)).collect();
    let vt = eig.eigenvectors.transpose();
    let t = vt
        .matmul(num)
        .matmul(&eig.eigenvectors)
        .scale_rows(&inv_sqrt)
        .scale_columns(&inv_sqrt);
    let t = symmetrize(&t);
    let te = symmetric_eigen(&t)?;
    Ok(te.eigenvalues.first().copied())
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    let mut s = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    s
}
