//! Small dense complex matrices for verification work: materialized
//! operators, LU solves, and the backing store for the eigensolvers.
//!
//! Everything here is guarded to modest dimensions; the sparse side of the
//! crate is the production path and dense objects exist to check it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::DENSE_LIMIT;

/// Row-major complex dense matrix, at most `DENSE_LIMIT` in either dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        assert!(
            nrows <= DENSE_LIMIT && ncols <= DENSE_LIMIT,
            "dense matrices are capped at {DENSE_LIMIT}"
        );
        DenseMatrix {
            nrows,
            ncols,
            data: vec![C64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(nrows: usize, ncols: usize, mut f: F) -> Self {
        let mut m = DenseMatrix::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "dense matvec on {}x{} with input length {}",
                self.nrows,
                self.ncols,
                x.len()
            )));
        }
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(y)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "dense product of {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.ncols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    /// self += coef * other.
    pub fn add_scaled(&mut self, coef: C64, other: &DenseMatrix) -> Result<()> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(
                "dense add of mismatched shapes".into(),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += coef * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, coef: C64) {
        for a in &mut self.data {
            *a *= coef;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<DenseLu> {
        if !self.is_square() {
            return Err(Error::InvalidParameter(
                "LU factorization needs a square matrix".into(),
            ));
        }
        let n = self.nrows;
        let mut a = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot at column {k}")));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let upd = factor * a[(k, j)];
                    a[(i, j)] -= upd;
                }
            }
        }
        Ok(DenseLu { lu: a, piv })
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Factored form of a square dense matrix.
pub struct DenseLu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.lu.nrows;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "LU solve of order {} with rhs length {}",
                n,
                b.len()
            )));
        }
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let row = self.lu.row(i);
            let mut sum = x[i];
            for (l, xj) in row[..i].iter().zip(&x[..i]) {
                sum -= l * xj;
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut sum = x[i];
            for (u, xj) in row[i + 1..].iter().zip(&x[i + 1..]) {
                sum -= u * xj;
            }
            x[i] = sum / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves A X = B column by column.
    pub fn solve_mat(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.lu.nrows;
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(
                "LU solve with mismatched block".into(),
            ));
        }
        let mut out = DenseMatrix::zeros(n, b.ncols());
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..b.ncols() {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col)?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.solve_mat(&DenseMatrix::identity(self.lu.nrows))
    }
}
