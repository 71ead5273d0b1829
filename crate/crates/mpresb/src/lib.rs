//! Sparse linear algebra and block preconditioners for the two-by-two
//! complex systems that arise from time-periodic parabolic optimal control.
//!
//! The crate assembles the Q1 finite-element model problem, wraps its system
//! matrix as a never-materialized block operator, and solves it with
//! restarted right-preconditioned GMRES under four preconditioners: the
//! modified PRESB variant with two real SPD inner solves per application,
//! classical PRESB, block diagonal (BD), and the block alternating
//! splitting preconditioner (BAS). A spectral module verifies the
//! eigenvalue structure of the preconditioned operator against a general
//! dense eigensolver, and a harness runs parameter grids into CSV and
//! Markdown tables.
//!
//! With the default `parallel` feature, independent grid cells and large
//! spmv row loops run on rayon; all results are bitwise identical to the
//! sequential fallback.

pub mod band;
pub mod block;
pub mod dense;
pub mod eig;
pub mod error;
pub mod fem;
pub mod harness;
pub mod inner;
pub mod krylov;
pub mod mm;
pub mod precond;
pub mod sparse;
pub mod spectral;

pub use band::{BandedCholesky, BandedLu};
pub use block::{BlockOperator, MatComb, Operator};
pub use dense::{DenseLu, DenseMatrix};
pub use eig::{
    general_eigenvalues, hermitian_eigenvalues, hermitian_eigs, GeneralEigen, HermitianEigen,
};
pub use error::{Error, Result};
pub use fem::{build_mesh, build_system, Mesh, ProblemInstance};
pub use harness::{
    export_problem, markdown_table, results_csv, run_spectrum, run_table, run_table_seq,
    timings_csv, write_spectrum, CellOutcome, RunConfig, SpectrumRun, TableRow,
};
pub use inner::{InnerConfig, InnerMode, InnerSolver};
pub use krylov::{cg, gmres, GmresConfig, Preconditioner, SolveReport};
pub use num_complex::Complex64;
pub use precond::{build as build_preconditioner, BlockPreconditioner, PrecondKind};
pub use sparse::{SparseMatrix, Values};
pub use spectral::{
    imaginary_bounds, spectrum, spectrum_general, spectrum_r_inv_q, ImaginaryBounds,
    SpectrumReport, SpectrumTarget,
};
