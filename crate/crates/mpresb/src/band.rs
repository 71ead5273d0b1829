//! Banded direct factorizations.
//!
//! The FEM matrices arrive with lexicographic node numbering, so M + c K has
//! half-bandwidth m+1 in 2D and m^2+m+1 in 3D. Factorizations that keep the
//! band give O(n bw^2) setup and O(n bw) solves, fast enough that a direct
//! inner solve never dominates the outer Krylov iteration at bench scale.
//!
//! Two factorizations live here: a real Cholesky for SPD matrices (reads the
//! lower triangle only) and a complex LU with partial pivoting for the
//! positive-definite but non-Hermitian PRESB blocks, stored LAPACK-style
//! with kl extra superdiagonals for pivot fill.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, Values};

/// Cholesky factor of a real SPD banded matrix.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row-major lower band: entry (i, j) at i*(bw+1) + (j + bw - i).
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidParameter(
                "Cholesky needs a square matrix".into(),
            ));
        }
        let vals = a.real_values()?;
        let n = a.nrows();
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0f64; n * w];
        let offsets = a.row_offsets();
        let cols = a.col_indices();
        for i in 0..n {
            for k in offsets[i]..offsets[i + 1] {
                let j = cols[k];
                if j <= i {
                    l[i * w + (j + bw - i)] = vals[k];
                }
            }
        }
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                let mut sum = l[i * w + (j + bw - i)];
                for k in jmin..j {
                    sum -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if j < i {
                    l[i * w + (j + bw - i)] = sum / l[j * w + (bw)];
                } else {
                    if sum <= 0.0 {
                        return Err(Error::NotPositiveDefinite(format!(
                            "nonpositive pivot {sum:.3e} at row {i}"
                        )));
                    }
                    l[i * w + bw] = sum.sqrt();
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves A x = b for a complex right-hand side; the real factor acts on
    /// real and imaginary parts componentwise.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "banded solve of order {} with rhs length {}",
                self.n,
                b.len()
            )));
        }
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut x = b.to_vec();
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            let pivot = i * w + bw;
            let mut sum = x[i];
            // Row i of L is contiguous: entries (i, jmin..i) sit just left
            // of the pivot slot.
            for (xk, lik) in x[jmin..i].iter().zip(&self.l[pivot - (i - jmin)..pivot]) {
                sum -= *lik * *xk;
            }
            x[i] = sum / self.l[pivot];
        }
        for i in (0..n).rev() {
            let kmax = (i + bw).min(n - 1);
            let mut sum = x[i];
            // Column i of L descends with stride w - 1 across the rows.
            for (k, xk) in x.iter().enumerate().take(kmax + 1).skip(i + 1) {
                sum -= self.l[k * w + (i + bw - k)] * *xk;
            }
            x[i] = sum / self.l[i * w + bw];
        }
        Ok(x)
    }
}

/// LU factors of a complex banded matrix with partial pivoting.
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// Superdiagonal count including pivot fill: 2*kl on entry bandwidth kl.
    kv: usize,
    /// Column-major bands: entry (i, j) at j*ldab + (kv + i - j).
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidParameter("LU needs a square matrix".into()));
        }
        let n = a.nrows();
        let kl = a.half_bandwidth();
        let ku = kl;
        let kv = kl + ku;
        let ldab = kv + kl + 1;
        let mut ab = vec![C64::new(0.0, 0.0); n * ldab];
        let offsets = a.row_offsets();
        let cols = a.col_indices();
        for i in 0..n {
            for k in offsets[i]..offsets[i + 1] {
                let j = cols[k];
                let v = match a.values() {
                    Values::Real(vals) => C64::new(vals[k], 0.0),
                    Values::Complex(vals) => vals[k],
                };
                ab[j * ldab + (kv + i - j)] = v;
            }
        }
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0usize;
            let mut best = ab[j * ldab + kv].norm();
            for t in 1..=km {
                let v = ab[j * ldab + kv + t].norm();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(c * ldab + kv + j - c, c * ldab + kv + j + jp - c);
                }
            }
            if km > 0 {
                let pivot = ab[j * ldab + kv];
                for t in 1..=km {
                    let m = ab[j * ldab + kv + t] / pivot;
                    ab[j * ldab + kv + t] = m;
                }
                for c in j + 1..=ju {
                    let f = ab[c * ldab + kv + j - c];
                    if f.re == 0.0 && f.im == 0.0 {
                        continue;
                    }
                    for t in 1..=km {
                        let upd = ab[j * ldab + kv + t] * f;
                        ab[c * ldab + kv + j + t - c] -= upd;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            kv,
            ab,
            ipiv,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "banded solve of order {} with rhs length {}",
                self.n,
                b.len()
            )));
        }
        let (n, kl, kv) = (self.n, self.kl, self.kv);
        let ldab = kv + kl + 1;
        let mut x = b.to_vec();
        if n == 0 {
            return Ok(x);
        }
        for j in 0..n - 1 {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let lm = kl.min(n - 1 - j);
            let xj = x[j];
            if xj.re == 0.0 && xj.im == 0.0 {
                continue;
            }
            for t in 1..=lm {
                let upd = self.ab[j * ldab + kv + t] * xj;
                x[j + t] -= upd;
            }
        }
        for j in (0..n).rev() {
            let pivot = j * ldab + kv;
            let xj = x[j] / self.ab[pivot];
            x[j] = xj;
            let imin = j.saturating_sub(kv);
            // Column j of U is contiguous directly above the pivot slot.
            for (xi, uij) in x[imin..j]
                .iter_mut()
                .zip(&self.ab[pivot - (j - imin)..pivot])
            {
                *xi -= *uij * xj;
            }
        }
        Ok(x)
    }
}
