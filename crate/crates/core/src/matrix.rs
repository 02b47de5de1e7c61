//! Dense row-major real matrices.
//!
//! Only the handful of operations the solver needs: products, transposes,
//! block extraction and a Cholesky factorization. Entries are always finite;
//! the public constructors reject NaN and infinities.

use std::fmt;
use std::ops::Index;

use crate::error::{MccaError, Result};

/// A dense matrix stored in row-major order: `data[i * cols + j]` holds `A[i, j]`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

fn check_finite(rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    if cols == 0 {
        return Ok(());
    }
    match data.iter().position(|x| !x.is_finite()) {
        Some(p) => Err(MccaError::NonFinite {
            row: p / cols,
            col: p % cols,
        }),
        None => {
            debug_assert_eq!(data.len(), rows * cols);
            Ok(())
        }
    }
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(MccaError::DimensionMismatch {
                op: "Mat::new",
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        check_finite(rows, cols, &data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(MccaError::DimensionMismatch {
                    op: "Mat::from_rows",
                    expected: format!("{ncols} columns"),
                    got: format!("{} columns in row {i}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let m = Self::from_fn_unchecked(rows, cols, f);
        check_finite(rows, cols, &m.data)?;
        Ok(m)
    }

    pub(crate) fn from_fn_unchecked(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// A single column vector.
    pub fn column_vector(v: &[f64]) -> Result<Self> {
        Self::new(v.len(), 1, v.to_vec())
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub(crate) fn set_column(&mut self, j: usize, v: &[f64]) {
        debug_assert_eq!(v.len(), self.rows);
        for (i, x) in v.iter().enumerate() {
            self.set(i, j, *x);
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn_unchecked(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Largest absolute entry; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MccaError::DimensionMismatch {
                op,
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(MccaError::DimensionMismatch {
                op: "matmul",
                expected: format!("{} rows on the right operand", self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(MccaError::DimensionMismatch {
                op: "t_matmul",
                expected: format!("{} rows on the right operand", self.rows),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, bv) in out_row.iter_mut().zip(b) {
                    *o += a * bv;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(MccaError::DimensionMismatch {
                op: "mul_vec",
                expected: format!("vector of length {}", self.cols),
                got: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Quadratic form `uᵀ · self · v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.rows {
            return Err(MccaError::DimensionMismatch {
                op: "bilinear",
                expected: format!("left vector of length {}", self.rows),
                got: format!("length {}", u.len()),
            });
        }
        Ok(dot(u, &self.mul_vec(v)?))
    }

    /// Copy of the `nrows × ncols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        assert!(r0 + nrows <= self.rows && c0 + ncols <= self.cols, "block out of range");
        Self::from_fn_unchecked(nrows, ncols, |i, j| self.get(r0 + i, c0 + j))
    }

    pub(crate) fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn_unchecked(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hstack(parts: &[Self]) -> Result<Self> {
        let rows = parts.first().map_or(0, |p| p.rows);
        if let Some(bad) = parts.iter().find(|p| p.rows != rows) {
            return Err(MccaError::DimensionMismatch {
                op: "hstack",
                expected: format!("{rows} rows"),
                got: format!("{} rows", bad.rows),
            });
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        Ok(out)
    }

    /// Largest `|A[i,j] - A[j,i]|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in (i + 1)..self.rows.min(self.cols) {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Lower-triangular `L` with `self = L·Lᵀ`; `None` if a pivot is not strictly positive.
    pub fn cholesky(&self) -> Result<Option<Self>> {
        if !self.is_square() {
            return Err(MccaError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if d.is_nan() || d <= 0.0 {
                return Ok(None);
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(Some(l))
    }

    /// Solves `L·X = B` for lower-triangular `self`.
    pub(crate) fn solve_lower(&self, b: &Self) -> Self {
        let n = self.rows;
        let mut x = b.clone();
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x.get(i, c);
                for k in 0..i {
                    s -= self.get(i, k) * x.get(k, c);
                }
                x.set(i, c, s / self.get(i, i));
            }
        }
        x
    }

    /// Solves `Lᵀ·X = B` for lower-triangular `self`.
    pub(crate) fn solve_lower_transpose(&self, b: &Self) -> Self {
        let n = self.rows;
        let mut x = b.clone();
        for c in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = x.get(i, c);
                for k in (i + 1)..n {
                    s -= self.get(k, i) * x.get(k, c);
                }
                x.set(i, c, s / self.get(i, i));
            }
        }
        x
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Free-function form of [`Mat::matmul`].
pub fn matmul(a: &Mat, b: &Mat) -> Result<Mat> {
    a.matmul(b)
}
