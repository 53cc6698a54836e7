//! Small dense/sparse kernels shared by every other module.
//!
//! Matrices are stored either as row-major dense data or as coordinate
//! triplets. Only the operations the moment, oracle and solver paths need are
//! provided: products with `A` and `Aᵀ`, a pivoted dense solve for tiny
//! systems, a determinant, and a Householder least-squares fit.

use std::collections::HashSet;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Largest system the dense kernels accept.
pub const DENSE_LIMIT: usize = 10;

/// Relative pivot threshold for [`solve_dense`].
pub const PIVOT_TOL: f64 = 1e-13;

/// Relative rank threshold for [`least_squares`].
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Validating constructor: non-empty, all entries finite.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one entry".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow);
        }
        Ok(Vector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        Vector(vec![1.0; n])
    }

    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Linear combination `Σ coeff_i · vec_i`; all vectors share one length.
    pub fn combination(terms: &[(f64, &Vector)]) -> Vector {
        let n = terms.first().map_or(0, |(_, v)| v.len());
        let mut out = Vector::zeros(n);
        for (c, v) in terms {
            out.axpy(*c, v);
        }
        out
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// Row-major values.
    Dense(Vec<f64>),
    /// Coordinate triplets `(row, col, value)`, no duplicates.
    Coordinate(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl Matrix {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow);
        }
        Ok(Matrix { rows, cols, storage: Storage::Dense(data) })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Matrix::dense(rows.len(), cols, rows.concat())
    }

    pub fn from_triplets(rows: usize, cols: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        let mut seen = HashSet::with_capacity(triplets.len());
        for &(i, j, v) in &triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidInput(format!("triplet ({i}, {j}) out of range")));
            }
            if !v.is_finite() {
                return Err(Error::NumericOverflow);
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidInput(format!("duplicate triplet ({i}, {j})")));
            }
        }
        Ok(Matrix { rows, cols, storage: Storage::Coordinate(triplets) })
    }

    pub fn identity(n: usize) -> Self {
        Matrix::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let triplets = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Matrix { rows: values.len(), cols: values.len(), storage: Storage::Coordinate(triplets) }
    }

    /// Constant-stencil tridiagonal matrix `(lower, diag, upper)`.
    pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> Self {
        let mut triplets = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                triplets.push((i, i - 1, lower));
            }
            triplets.push((i, i, diag));
            if i + 1 < n {
                triplets.push((i, i + 1, upper));
            }
        }
        Matrix { rows: n, cols: n, storage: Storage::Coordinate(triplets) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| **v != 0.0).count(),
            Storage::Coordinate(t) => t.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.cols + j],
            Storage::Coordinate(t) => t.iter().find(|(r, c, _)| *r == i && *c == j).map_or(0.0, |(_, _, v)| *v),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Coordinate(t) => {
                let mut d = vec![0.0; self.rows * self.cols];
                for &(i, j, v) in t {
                    d[i * self.cols + j] = v;
                }
                d
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        let values: Box<dyn Iterator<Item = f64>> = match &self.storage {
            Storage::Dense(d) => Box::new(d.iter().copied()),
            Storage::Coordinate(t) => Box::new(t.iter().map(|e| e.2)),
        };
        values.fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Storage::Coordinate(t) => t.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt(),
        }
    }
}

/// `M · v`
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols != v.len() {
        return Err(Error::DimensionMismatch { expected: m.cols, found: v.len() });
    }
    let mut out = vec![0.0; m.rows];
    match &m.storage {
        Storage::Dense(d) => {
            for (row, o) in d.chunks_exact(m.cols).zip(out.iter_mut()) {
                *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            }
        }
        Storage::Coordinate(t) => {
            for &(i, j, a) in t {
                out[i] += a * v[j];
            }
        }
    }
    Ok(Vector(out))
}

/// `Mᵀ · v`
pub fn transpose_matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.rows != v.len() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: v.len() });
    }
    let mut out = vec![0.0; m.cols];
    match &m.storage {
        Storage::Dense(d) => {
            for (row, vi) in d.chunks_exact(m.cols).zip(v.iter()) {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += a * vi;
                }
            }
        }
        Storage::Coordinate(t) => {
            for &(i, j, a) in t {
                out[j] += a * v[i];
            }
        }
    }
    Ok(Vector(out))
}

fn check_small_square(m: &Matrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
    }
    if m.rows > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!("dense kernels are limited to n <= {DENSE_LIMIT}, got {}", m.rows)));
    }
    Ok(m.rows)
}

/// Gaussian elimination with partial (row) pivoting for `n <= 10`.
///
/// A pivot below `1e-13 · max|M|` is reported as [`Error::SingularSystem`]
/// carrying the elimination column where it occurred.
pub fn solve_dense(m: &Matrix, b: &Vector) -> Result<Vector> {
    let n = check_small_square(m)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let mut a = m.to_dense();
    let mut rhs = b.to_vec();
    let tol = PIVOT_TOL * m.max_abs();

    for col in 0..n {
        let (p, pmax) =
            (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax > tol) || pmax == 0.0 {
            return Err(Error::SingularSystem { pivot: col });
        }
        if p != col {
            for j in 0..n {
                a.swap(p * n + j, col * n + j);
            }
            rhs.swap(p, col);
        }
        let pivot = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            rhs[r] -= f * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - s) / a[i * n + i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow);
    }
    Ok(Vector(x))
}

/// Determinant by pivoted elimination. An exactly zero pivot column yields 0.
pub fn determinant(m: &Matrix) -> Result<f64> {
    let n = check_small_square(m)?;
    let mut a = m.to_dense();
    let mut det = 1.0;
    for col in 0..n {
        let (p, pmax) =
            (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return Ok(0.0);
        }
        if p != col {
            for j in 0..n {
                a.swap(p * n + j, col * n + j);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        for r in col + 1..n {
            let f = a[r * n + col] / pivot;
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
        }
    }
    Ok(det)
}

/// Householder QR least squares for a tall `m × n` design (`m >= n`).
///
/// Returns the minimizing coefficients and the minimum residual norm. A
/// diagonal entry of `R` below `1e-12` times the largest column norm raises
/// [`Error::RankDeficient`].
pub fn least_squares(m: &Matrix, b: &Vector) -> Result<(Vector, f64)> {
    let (rows, cols) = (m.rows, m.cols);
    if rows < cols {
        return Err(Error::InvalidInput(format!("least squares needs rows >= cols, got {rows} x {cols}")));
    }
    if b.len() != rows {
        return Err(Error::DimensionMismatch { expected: rows, found: b.len() });
    }
    let mut a = m.to_dense();
    let mut rhs = b.to_vec();
    let max_col_norm =
        (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j].powi(2)).sum::<f64>().sqrt()).fold(0.0_f64, f64::max);
    let tol = RANK_TOL * max_col_norm;

    for j in 0..cols {
        let norm = (j..rows).map(|i| a[i * cols + j].powi(2)).sum::<f64>().sqrt();
        if !(norm > tol) {
            return Err(Error::RankDeficient { column: j });
        }
        let alpha = if a[j * cols + j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..rows).map(|i| a[i * cols + j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for c in j..cols {
                let s: f64 = v.iter().enumerate().map(|(t, vi)| vi * a[(j + t) * cols + c]).sum();
                let f = 2.0 * s / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    a[(j + t) * cols + c] -= f * vi;
                }
            }
            let s: f64 = v.iter().enumerate().map(|(t, vi)| vi * rhs[j + t]).sum();
            let f = 2.0 * s / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                rhs[j + t] -= f * vi;
            }
        }
    }

    let mut x = vec![0.0; cols];
    for i in (0..cols).rev() {
        let s: f64 = (i + 1..cols).map(|j| a[i * cols + j] * x[j]).sum();
        x[i] = (rhs[i] - s) / a[i * cols + i];
    }
    let residual = rhs[cols..].iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((Vector(x), residual))
}
