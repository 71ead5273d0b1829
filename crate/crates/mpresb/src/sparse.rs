//! Compressed sparse row matrices over real or complex scalars.
//!
//! Matrices are immutable after construction and always canonical: column
//! indices sorted within each row, duplicate entries summed, exact zeros
//! dropped. Real-valued matrices act on complex vectors componentwise, so
//! FEM matrices stay in real storage while the Krylov solvers work in C^n.
//!
//! `spmv` results are bitwise deterministic: every output element is a
//! fixed-order sequential reduction over one row. The `parallel` feature
//! distributes rows across threads without changing any per-row sum.

use num_complex::Complex64 as C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count at which the parallel feature starts splitting spmv across
/// threads; below this the rayon dispatch overhead dominates.
#[cfg(feature = "parallel")]
const SPMV_PAR_MIN_ROWS: usize = 4096;

/// Largest dimension `to_dense` will materialize.
pub const DENSE_LIMIT: usize = 1024;

/// Scalar storage of a sparse matrix, tagged real or complex.
#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

/// Canonical CSR matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Values,
}

fn canonicalize<T, Z>(
    nrows: usize,
    ncols: usize,
    mut triplets: Vec<(usize, usize, T)>,
    is_zero: Z,
) -> Result<(Vec<usize>, Vec<usize>, Vec<T>)>
where
    T: Copy + std::ops::AddAssign,
    Z: Fn(&T) -> bool,
{
    for &(i, j, _) in &triplets {
        if i >= nrows || j >= ncols {
            return Err(Error::DimensionMismatch(format!(
                "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
    }
    triplets.sort_by_key(|&(i, j, _)| (i, j));

    let mut row_offsets = vec![0usize; nrows + 1];
    let mut col_indices = Vec::with_capacity(triplets.len());
    let mut values: Vec<T> = Vec::with_capacity(triplets.len());
    let mut iter = triplets.into_iter().peekable();
    while let Some((i, j, v)) = iter.next() {
        let mut sum = v;
        while let Some(&(i2, j2, v2)) = iter.peek() {
            if i2 == i && j2 == j {
                sum += v2;
                iter.next();
            } else {
                break;
            }
        }
        if !is_zero(&sum) {
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(sum);
        }
    }
    for i in 0..nrows {
        row_offsets[i + 1] += row_offsets[i];
    }
    Ok((row_offsets, col_indices, values))
}

impl SparseMatrix {
    /// Builds a real matrix from COO triplets (duplicates summed, zeros dropped).
    pub fn from_real_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let (row_offsets, col_indices, vals) = canonicalize(nrows, ncols, triplets, |v| *v == 0.0)?;
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values: Values::Real(vals),
        })
    }

    /// Builds a complex matrix from COO triplets (duplicates summed, zeros dropped).
    pub fn from_complex_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        let (row_offsets, col_indices, vals) =
            canonicalize(nrows, ncols, triplets, |v| v.re == 0.0 && v.im == 0.0)?;
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values: Values::Complex(vals),
        })
    }

    /// Real identity of order `n`.
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: Values::Real(vec![1.0; n]),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.values, Values::Real(_))
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    /// Real value slice, or an error for complex storage.
    pub fn real_values(&self) -> Result<&[f64]> {
        match &self.values {
            Values::Real(v) => Ok(v),
            Values::Complex(_) => Err(Error::InvalidParameter(
                "expected a real-valued matrix".into(),
            )),
        }
    }

    /// Entry (i, j) as a complex number (zero if not stored).
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        match self.col_indices[lo..hi].binary_search(&j) {
            Ok(pos) => match &self.values {
                Values::Real(v) => C64::new(v[lo + pos], 0.0),
                Values::Complex(v) => v[lo + pos],
            },
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Largest |i - j| over stored entries. Zero for empty matrices.
    pub fn half_bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    /// Plain transpose (values unchanged).
    pub fn transpose(&self) -> Self {
        self.transposed(false)
    }

    /// Conjugate transpose. Equals `transpose` for real storage.
    pub fn adjoint(&self) -> Self {
        self.transposed(true)
    }

    fn transposed(&self, conjugate: bool) -> Self {
        let nnz = self.nnz();
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut col_indices = vec![0usize; nnz];
        let mut next = counts.clone();
        match &self.values {
            Values::Real(vals) => {
                let mut out = vec![0.0f64; nnz];
                for i in 0..self.nrows {
                    let range = self.row_offsets[i]..self.row_offsets[i + 1];
                    for (&j, &v) in self.col_indices[range.clone()].iter().zip(&vals[range]) {
                        let p = next[j];
                        next[j] += 1;
                        col_indices[p] = i;
                        out[p] = v;
                    }
                }
                SparseMatrix {
                    nrows: self.ncols,
                    ncols: self.nrows,
                    row_offsets: counts,
                    col_indices,
                    values: Values::Real(out),
                }
            }
            Values::Complex(vals) => {
                let mut out = vec![C64::new(0.0, 0.0); nnz];
                for i in 0..self.nrows {
                    let range = self.row_offsets[i]..self.row_offsets[i + 1];
                    for (&j, &v) in self.col_indices[range.clone()].iter().zip(&vals[range]) {
                        let p = next[j];
                        next[j] += 1;
                        col_indices[p] = i;
                        out[p] = if conjugate { v.conj() } else { v };
                    }
                }
                SparseMatrix {
                    nrows: self.ncols,
                    ncols: self.nrows,
                    row_offsets: counts,
                    col_indices,
                    values: Values::Complex(out),
                }
            }
        }
    }

    fn check_apply_dims(&self, xlen: usize, ylen: usize) -> Result<()> {
        if xlen != self.ncols || ylen != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv on a {}x{} matrix with input length {} and output length {}",
                self.nrows, self.ncols, xlen, ylen
            )));
        }
        Ok(())
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        match &self.values {
            Values::Real(vals) => {
                let mut re = 0.0;
                let mut im = 0.0;
                for k in lo..hi {
                    let xv = x[self.col_indices[k]];
                    re += vals[k] * xv.re;
                    im += vals[k] * xv.im;
                }
                C64::new(re, im)
            }
            Values::Complex(vals) => {
                let mut sum = C64::new(0.0, 0.0);
                for k in lo..hi {
                    sum += vals[k] * x[self.col_indices[k]];
                }
                sum
            }
        }
    }

    /// y = A x.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.axpy_into(C64::new(1.0, 0.0), x, &mut y)?;
        Ok(y)
    }

    /// y += coef * A x. Dispatches to the row-parallel kernel when the
    /// `parallel` feature is on and the matrix is large enough; results are
    /// bitwise identical either way.
    pub fn axpy_into(&self, coef: C64, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.check_apply_dims(x.len(), y.len())?;
        #[cfg(feature = "parallel")]
        if self.nrows >= SPMV_PAR_MIN_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi += coef * self.row_dot(i, x));
            return Ok(());
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += coef * self.row_dot(i, x);
        }
        Ok(())
    }

    /// Sequential reference path for y += coef * A x (always available).
    pub fn axpy_into_seq(&self, coef: C64, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.check_apply_dims(x.len(), y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += coef * self.row_dot(i, x);
        }
        Ok(())
    }

    /// y = A x for real storage and real vectors (CG works in R^n).
    pub fn apply_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv on a {}x{} matrix with input length {}",
                self.nrows,
                self.ncols,
                x.len()
            )));
        }
        let vals = self.real_values()?;
        let mut y = vec![0.0f64; self.nrows];
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_offsets[i]..self.row_offsets[i + 1];
            let mut sum = 0.0;
            for (&j, &v) in self.col_indices[range.clone()].iter().zip(&vals[range]) {
                sum += v * x[j];
            }
            *yi = sum;
        }
        Ok(y)
    }

    /// Sum of scaled real matrices with identical shapes, in real storage.
    pub fn linear_combination_real(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let (nrows, ncols) = combination_shape(terms.iter().map(|(_, m)| *m))?;
        let mut triplets = Vec::new();
        for &(coef, m) in terms {
            let vals = m.real_values()?;
            for i in 0..m.nrows {
                let range = m.row_offsets[i]..m.row_offsets[i + 1];
                for (&j, &v) in m.col_indices[range.clone()].iter().zip(&vals[range]) {
                    triplets.push((i, j, coef * v));
                }
            }
        }
        SparseMatrix::from_real_triplets(nrows, ncols, triplets)
    }

    /// Sum of complex-scaled matrices (real or complex), in complex storage.
    pub fn linear_combination_complex(terms: &[(C64, &SparseMatrix)]) -> Result<Self> {
        let (nrows, ncols) = combination_shape(terms.iter().map(|(_, m)| *m))?;
        let mut triplets = Vec::new();
        for &(coef, m) in terms {
            for i in 0..m.nrows {
                let range = m.row_offsets[i]..m.row_offsets[i + 1];
                for (pos, &j) in (range.clone()).zip(&m.col_indices[range]) {
                    let v = match &m.values {
                        Values::Real(vals) => C64::new(vals[pos], 0.0),
                        Values::Complex(vals) => vals[pos],
                    };
                    triplets.push((i, j, coef * v));
                }
            }
        }
        SparseMatrix::from_complex_triplets(nrows, ncols, triplets)
    }

    /// Dense materialization, guarded to small dimensions.
    pub fn to_dense(&self) -> Result<crate::dense::DenseMatrix> {
        let dim = self.nrows.max(self.ncols);
        if dim > DENSE_LIMIT {
            return Err(Error::DenseGuard {
                dim,
                max: DENSE_LIMIT,
            });
        }
        let mut dense = crate::dense::DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                let v = match &self.values {
                    Values::Real(vals) => C64::new(vals[k], 0.0),
                    Values::Complex(vals) => vals[k],
                };
                dense[(i, j)] = v;
            }
        }
        Ok(dense)
    }
}

fn combination_shape<'a, I: Iterator<Item = &'a SparseMatrix>>(
    mut mats: I,
) -> Result<(usize, usize)> {
    let first = mats
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
    let shape = (first.nrows, first.ncols);
    for m in mats {
        if (m.nrows, m.ncols) != shape {
            return Err(Error::DimensionMismatch(format!(
                "linear combination mixes {}x{} and {}x{} matrices",
                shape.0, shape.1, m.nrows, m.ncols
            )));
        }
    }
    Ok(shape)
}
