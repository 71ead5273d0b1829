//! Inner solves for the preconditioner blocks.
//!
//! Every preconditioner application reduces to two solves with a fixed SPD
//! (or complex positive definite) matrix. An `InnerSolver` owns that matrix,
//! factors it once at construction in direct mode (banded Cholesky for real
//! SPD, banded LU for complex), or solves iteratively on demand (CG on the
//! real and imaginary parts for SPD, full GMRES for complex). Direct solves
//! land at machine-level residuals; iterative solves honor the configured
//! tolerance or fail loudly.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::band::{BandedCholesky, BandedLu};
use crate::error::{Error, Result};
use crate::krylov::{cg, gmres, GmresConfig};
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMode {
    Direct,
    Iterative,
}

/// Inner-solver configuration shared by all preconditioners in a run.
#[derive(Clone, Debug)]
pub struct InnerConfig {
    pub mode: InnerMode,
    /// Relative residual tolerance for iterative mode.
    pub tol: f64,
    /// Iteration cap for iterative mode; defaults to 10n.
    pub maxit: Option<usize>,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            mode: InnerMode::Direct,
            tol: 1e-12,
            maxit: None,
        }
    }
}

enum Backend {
    Cholesky(BandedCholesky),
    Lu(BandedLu),
    /// CG on the real and imaginary parts separately.
    CgReal,
    /// Full (effectively unrestarted) GMRES.
    GmresComplex,
}

/// A solver for one fixed square matrix, counting its solves.
pub struct InnerSolver {
    matrix: Arc<SparseMatrix>,
    backend: Backend,
    tol: f64,
    maxit: usize,
    count: AtomicUsize,
}

impl InnerSolver {
    pub fn new(matrix: Arc<SparseMatrix>, cfg: &InnerConfig) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidParameter(
                "inner solver needs a square matrix".into(),
            ));
        }
        let n = matrix.nrows();
        let backend = match (cfg.mode, matrix.is_real()) {
            (InnerMode::Direct, true) => Backend::Cholesky(BandedCholesky::factor(&matrix)?),
            (InnerMode::Direct, false) => Backend::Lu(BandedLu::factor(&matrix)?),
            (InnerMode::Iterative, true) => Backend::CgReal,
            (InnerMode::Iterative, false) => Backend::GmresComplex,
        };
        Ok(InnerSolver {
            matrix,
            backend,
            tol: cfg.tol,
            maxit: cfg.maxit.unwrap_or(10 * n.max(1)),
            count: AtomicUsize::new(0),
        })
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Number of solves performed so far.
    pub fn solves(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.count.fetch_add(1, Ordering::Relaxed);
        match &self.backend {
            Backend::Cholesky(f) => f.solve(b),
            Backend::Lu(f) => f.solve(b),
            Backend::CgReal => {
                let re: Vec<f64> = b.iter().map(|v| v.re).collect();
                let im: Vec<f64> = b.iter().map(|v| v.im).collect();
                let xre = self.cg_part(&re)?;
                let xim = self.cg_part(&im)?;
                Ok(xre
                    .into_iter()
                    .zip(xim)
                    .map(|(r, i)| C64::new(r, i))
                    .collect())
            }
            Backend::GmresComplex => {
                let cfg = GmresConfig {
                    restart: self.maxit.clamp(1, 500),
                    tol: self.tol,
                    maxit: self.maxit,
                };
                let (x, rep) = gmres(self.matrix.as_ref(), None, b, None, &cfg)?;
                if !rep.converged {
                    return Err(Error::NonConvergence {
                        what: "inner gmres",
                        iterations: rep.iterations,
                        residual: rep.final_true_residual,
                    });
                }
                Ok(x)
            }
        }
    }

    fn cg_part(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (x, rep) = cg(&self.matrix, b, self.tol, self.maxit)?;
        if !rep.converged {
            return Err(Error::NonConvergence {
                what: "inner cg",
                iterations: rep.iterations,
                residual: rep.final_true_residual,
            });
        }
        Ok(x)
    }
}
