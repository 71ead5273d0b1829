//! Desk-scale spectral analysis of the preconditioned operators.
//!
//! The centerpiece is [`spectrum_r_inv_q`], which computes the full spectrum
//! of R^{-1} Q without ever forming the nonsymmetric matrix: with F = M,
//! H = (G + G*)/2 and the skew-Hermitian part (G - G*)/2 = i omega
//! sqrt(nu) M, the spectrum is the union of spec(I + (F+H)^{-1} (G-G*)/2)
//! and its reflection, so every eigenvalue is 1 +- i mu where the mu are the
//! real eigenvalues of the Hermitian matrix
//!
//! ```text
//!   W = omega sqrt(nu) (F+H)^{-1/2} M (F+H)^{-1/2},   F + H = M + sqrt(nu) K.
//! ```
//!
//! That turns a nonsymmetric eigenproblem into a Hermitian one with a
//! per-eigenpair residual certificate. [`imaginary_bounds`] computes the
//! companion interval for |Im(lambda)| from the extreme eigenvalues of
//! S = M^{-1/2} K M^{-1/2}, and [`spectrum_general`] is the independent
//! dense route used for cross-checks and for the R^{-1}A / Q^{-1}A scatter
//! targets.

use num_complex::Complex64 as C64;

use crate::block::BlockOperator;
use crate::dense::DenseMatrix;
use crate::eig::{general_eigenvalues, hermitian_eigs};
use crate::error::{Error, Result};
use crate::fem::ProblemInstance;
use crate::precond::{mpresb_operator, presb_operator};
use crate::sparse::SparseMatrix;

/// Largest half-dimension n accepted by the spectral routines (the block
/// operators they analyze are 2n x 2n dense).
pub const SPECTRUM_LIMIT: usize = 512;

/// A computed spectrum plus the residual certificate it was verified with.
pub struct SpectrumReport {
    /// All eigenvalues, sorted by real part then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// For the structured route: max_i ||W v_i - mu_i v_i||_2 over the
    /// Hermitian reduction's eigenpairs (unit vectors). For the general
    /// route: the Schur residual ||A - U T U*||_F / ||A||_F.
    pub max_residual: f64,
    /// Human-readable description of the analyzed operator.
    pub source: String,
}

/// The interval that contains |Im(lambda)| for every eigenvalue of R^{-1} Q
/// with nonzero imaginary part, together with the extreme eigenvalues of
/// S = M^{-1/2} K M^{-1/2} it is built from.
#[derive(Clone, Copy, Debug)]
pub struct ImaginaryBounds {
    /// sqrt(nu) omega / (1 + sqrt(nu) lambda_max(S)).
    pub lower: f64,
    /// sqrt(nu) omega / (1 + sqrt(nu) lambda_min(S)).
    pub upper: f64,
    pub lambda_min_s: f64,
    pub lambda_max_s: f64,
}

/// Which preconditioned operator a spectrum run analyzes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumTarget {
    /// R^{-1} Q via the structured Hermitian reduction.
    RInvQ,
    /// R^{-1} A via dense materialization and the general eigensolver.
    RInvA,
    /// Q^{-1} A via dense materialization and the general eigensolver.
    QInvA,
}

impl SpectrumTarget {
    pub const ALL: [SpectrumTarget; 3] = [
        SpectrumTarget::RInvQ,
        SpectrumTarget::RInvA,
        SpectrumTarget::QInvA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumTarget::RInvQ => "rinvq",
            SpectrumTarget::RInvA => "rinva",
            SpectrumTarget::QInvA => "qinva",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rinvq" => Ok(SpectrumTarget::RInvQ),
            "rinva" => Ok(SpectrumTarget::RInvA),
            "qinva" => Ok(SpectrumTarget::QInvA),
            other => Err(Error::InvalidParameter(format!(
                "unknown spectrum target '{other}' (expected rinvq, rinva, or qinva)"
            ))),
        }
    }
}

fn guard(n: usize) -> Result<()> {
    if n > SPECTRUM_LIMIT {
        return Err(Error::DenseGuard {
            dim: n,
            max: SPECTRUM_LIMIT,
        });
    }
    Ok(())
}

fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// B^{-1/2} for a symmetric positive definite sparse matrix, through its
/// full eigendecomposition.
fn inverse_sqrt(b: &SparseMatrix, what: &str) -> Result<DenseMatrix> {
    let eig = hermitian_eigs(&b.to_dense()?, true)?;
    if eig.values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "{what} has eigenvalue {:.3e}",
            eig.values[0]
        )));
    }
    let v = eig.vectors.expect("vectors were requested");
    let n = b.nrows();
    // V diag(lambda^{-1/2}) V*
    let mut vd = v.clone();
    for j in 0..n {
        let s = 1.0 / eig.values[j].sqrt();
        for i in 0..n {
            vd[(i, j)] *= s;
        }
    }
    vd.matmul(&v.adjoint())
}

fn hermitian_part(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        (a[(i, j)] + a[(j, i)].conj()) * 0.5
    })
}

/// Spectrum of R^{-1} Q through the Hermitian reduction described in the
/// module docs. Returns all 2n eigenvalues 1 +- i mu_j.
pub fn spectrum_r_inv_q(p: &ProblemInstance) -> Result<SpectrumReport> {
    let n = p.n();
    guard(n)?;
    let s = p.nu.sqrt();
    let fph = SparseMatrix::linear_combination_real(&[(1.0, &p.mass), (s, &p.stiffness)])?;
    let fph_inv_sqrt = inverse_sqrt(&fph, "F + H = M + sqrt(nu) K")?;
    let m_dense = p.mass.to_dense()?;
    let mut w = fph_inv_sqrt.matmul(&m_dense)?.matmul(&fph_inv_sqrt)?;
    w.scale(C64::new(p.omega * s, 0.0));
    let w = hermitian_part(&w);
    let eig = hermitian_eigs(&w, true)?;
    let vectors = eig.vectors.as_ref().expect("vectors were requested");
    let mut max_residual = 0.0f64;
    for j in 0..n {
        let col: Vec<C64> = (0..n).map(|i| vectors[(i, j)]).collect();
        let wv = w.matvec(&col)?;
        let r: f64 = (0..n)
            .map(|i| (wv[i] - col[i] * eig.values[j]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
    }
    let mut eigenvalues = Vec::with_capacity(2 * n);
    for &mu in &eig.values {
        eigenvalues.push(C64::new(1.0, mu));
        eigenvalues.push(C64::new(1.0, -mu));
    }
    sort_complex(&mut eigenvalues);
    Ok(SpectrumReport {
        eigenvalues,
        max_residual,
        source: "R^{-1} Q (Hermitian reduction)".to_string(),
    })
}

/// Interval for |Im(lambda)| over spec(R^{-1} Q), from the extreme
/// eigenvalues of S = M^{-1/2} K M^{-1/2}.
pub fn imaginary_bounds(p: &ProblemInstance) -> Result<ImaginaryBounds> {
    let n = p.n();
    guard(n)?;
    let m_inv_sqrt = inverse_sqrt(&p.mass, "mass matrix")?;
    let k_dense = p.stiffness.to_dense()?;
    let s_mat = hermitian_part(&m_inv_sqrt.matmul(&k_dense)?.matmul(&m_inv_sqrt)?);
    let values = hermitian_eigs(&s_mat, false)?.values;
    let (lambda_min_s, lambda_max_s) = (values[0], values[n - 1]);
    let s = p.nu.sqrt();
    Ok(ImaginaryBounds {
        lower: s * p.omega / (1.0 + s * lambda_max_s),
        upper: s * p.omega / (1.0 + s * lambda_min_s),
        lambda_min_s,
        lambda_max_s,
    })
}

/// Spectrum of an arbitrary dense matrix through the general eigensolver,
/// reported with its Schur residual.
pub fn spectrum_general(t: &DenseMatrix, source: &str) -> Result<SpectrumReport> {
    if t.nrows() > 2 * SPECTRUM_LIMIT {
        return Err(Error::DenseGuard {
            dim: t.nrows(),
            max: 2 * SPECTRUM_LIMIT,
        });
    }
    let gen = general_eigenvalues(t)?;
    Ok(SpectrumReport {
        eigenvalues: gen.values,
        max_residual: gen.schur_residual,
        source: source.to_string(),
    })
}

/// P^{-1} N materialized densely via LU of P.
pub fn dense_preconditioned(p: &BlockOperator, n: &BlockOperator) -> Result<DenseMatrix> {
    let pd = p.to_dense()?;
    let nd = n.to_dense()?;
    pd.lu()?.solve_mat(&nd)
}

/// Runs the requested spectrum target for a problem instance.
pub fn spectrum(p: &ProblemInstance, target: SpectrumTarget) -> Result<SpectrumReport> {
    guard(p.n())?;
    match target {
        SpectrumTarget::RInvQ => spectrum_r_inv_q(p),
        SpectrumTarget::RInvA => {
            let t = dense_preconditioned(&mpresb_operator(p)?, &p.operator())?;
            spectrum_general(&t, "R^{-1} A (dense)")
        }
        SpectrumTarget::QInvA => {
            let t = dense_preconditioned(&presb_operator(p)?, &p.operator())?;
            spectrum_general(&t, "Q^{-1} A (dense)")
        }
    }
}

/// Scatter CSV with header `re,im` and 17 significant digits per value.
pub fn scatter_csv(eigenvalues: &[C64]) -> String {
    let mut out = String::from("re,im\n");
    for v in eigenvalues {
        out.push_str(&format!("{:.16e},{:.16e}\n", v.re, v.im));
    }
    out
}

/// Largest distance in a greedy pairing of two equal-size multisets;
/// intended for verifying that two independently computed spectra agree.
pub fn multiset_max_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal cardinality");
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    let key = |x: &C64, y: &C64| x.im.total_cmp(&y.im).then(x.re.total_cmp(&y.re));
    sa.sort_by(key);
    sb.sort_by(key);
    sa.iter()
        .zip(&sb)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
