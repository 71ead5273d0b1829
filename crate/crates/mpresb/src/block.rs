//! Two-by-two block operators assembled from scalar-weighted sums of sparse
//! matrices.
//!
//! The system matrices treated here have blocks like -G* with
//! G = sqrt(nu) K + i sqrt(nu) omega M; those are never materialized.
//! Each block is a list of (complex multiplier, real-or-complex matrix)
//! terms and the adjoint of a term is the conjugate multiplier times the
//! conjugate-transposed matrix, which is precomputed once at construction.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, DENSE_LIMIT};

/// Anything that acts linearly on C^n. Implemented by `BlockOperator` and by
/// the small test operators in the solver tests.
pub trait Operator: Sync {
    fn dim(&self) -> usize;
    /// y = A x.
    fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()>;

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }
}

impl Operator for SparseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        y.fill(C64::new(0.0, 0.0));
        self.axpy_into(C64::new(1.0, 0.0), x, y)
    }
}

/// Multiplier-weighted sum of square sparse matrices, all of order `n`.
#[derive(Clone)]
pub struct MatComb {
    n: usize,
    terms: Vec<(C64, Arc<SparseMatrix>)>,
}

impl MatComb {
    /// The zero operator of order `n`.
    pub fn zero(n: usize) -> Self {
        MatComb {
            n,
            terms: Vec::new(),
        }
    }

    pub fn new(n: usize, terms: Vec<(C64, Arc<SparseMatrix>)>) -> Result<Self> {
        for (_, m) in &terms {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "block term is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(MatComb { n, terms })
    }

    pub fn term(mut self, coef: C64, matrix: Arc<SparseMatrix>) -> Result<Self> {
        if matrix.nrows() != self.n || matrix.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "block term is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                self.n,
                self.n
            )));
        }
        self.terms.push((coef, matrix));
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Conjugate transpose of the whole sum.
    pub fn adjoint(&self) -> Self {
        MatComb {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, m)| (c.conj(), Arc::new(m.adjoint())))
                .collect(),
        }
    }

    /// Negation of the whole sum.
    pub fn negated(&self) -> Self {
        MatComb {
            n: self.n,
            terms: self.terms.iter().map(|(c, m)| (-c, m.clone())).collect(),
        }
    }

    /// y += (sum of terms) x.
    pub fn accumulate(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        for (coef, m) in &self.terms {
            m.axpy_into(*coef, x, y)?;
        }
        Ok(())
    }

    /// The sum flattened to a single canonical sparse matrix.
    pub fn to_sparse(&self) -> Result<SparseMatrix> {
        if self.terms.is_empty() {
            return SparseMatrix::from_complex_triplets(self.n, self.n, vec![]);
        }
        let terms: Vec<(C64, &SparseMatrix)> =
            self.terms.iter().map(|(c, m)| (*c, m.as_ref())).collect();
        SparseMatrix::linear_combination_complex(&terms)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.n > DENSE_LIMIT {
            return Err(Error::DenseGuard {
                dim: self.n,
                max: DENSE_LIMIT,
            });
        }
        let mut out = DenseMatrix::zeros(self.n, self.n);
        for (coef, m) in &self.terms {
            out.add_scaled(*coef, &m.to_dense()?)?;
        }
        Ok(out)
    }
}

/// Square two-by-two block operator on C^{2n}.
#[derive(Clone)]
pub struct BlockOperator {
    n: usize,
    blocks: [[MatComb; 2]; 2],
}

impl BlockOperator {
    pub fn new(blocks: [[MatComb; 2]; 2]) -> Result<Self> {
        let n = blocks[0][0].order();
        for row in &blocks {
            for b in row {
                if b.order() != n {
                    return Err(Error::DimensionMismatch("block orders disagree".into()));
                }
            }
        }
        Ok(BlockOperator { n, blocks })
    }

    /// Block order n (the full operator acts on C^{2n}).
    pub fn block_order(&self) -> usize {
        self.n
    }

    pub fn block(&self, i: usize, j: usize) -> &MatComb {
        &self.blocks[i][j]
    }

    /// Dense materialization of the full 2n x 2n matrix (guarded).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let dim = 2 * self.n;
        if dim > DENSE_LIMIT {
            return Err(Error::DenseGuard {
                dim,
                max: DENSE_LIMIT,
            });
        }
        let mut out = DenseMatrix::zeros(dim, dim);
        for bi in 0..2 {
            for bj in 0..2 {
                let d = self.blocks[bi][bj].to_dense()?;
                for i in 0..self.n {
                    for j in 0..self.n {
                        out[(bi * self.n + i, bj * self.n + j)] = d[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Operator for BlockOperator {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        let n = self.n;
        if x.len() != 2 * n || y.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "block apply expects length {}, got {} and {}",
                2 * n,
                x.len(),
                y.len()
            )));
        }
        y.fill(C64::new(0.0, 0.0));
        let (xu, xl) = x.split_at(n);
        let (yu, yl) = y.split_at_mut(n);
        self.blocks[0][0].accumulate(xu, yu)?;
        self.blocks[0][1].accumulate(xl, yu)?;
        self.blocks[1][0].accumulate(xu, yl)?;
        self.blocks[1][1].accumulate(xl, yl)?;
        Ok(())
    }
}
