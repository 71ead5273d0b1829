//! Dense eigensolvers.
//!
//! Two independent routes, so each can serve as an oracle for the other:
//!
//! * [`hermitian_eigs`] - Householder tridiagonalization of a Hermitian
//!   matrix, a diagonal phase scaling that makes the tridiagonal real, and
//!   implicit-shift QL iteration. Returns real eigenvalues in ascending
//!   order and, on request, an orthonormal set of eigenvectors.
//! * [`general_eigenvalues`] - Householder reduction to upper Hessenberg
//!   form followed by explicitly shifted QR with deflation, accumulating the
//!   unitary similarity so the result carries a verifiable Schur residual
//!   ||A - U T U*||_F / ||A||_F.
//!
//! Both are O(n^3) dense algorithms guarded by the same size cap as
//! [`DenseMatrix`] itself; they exist for verification and spectrum studies,
//! not for production-scale eigenproblems.

use num_complex::Complex64 as C64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_QL_SWEEPS: usize = 50;

/// Relative hermiticity tolerance accepted by `hermitian_eigs`.
const HERMITICITY_TOL: f64 = 1e-8;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Eigendecomposition of a Hermitian matrix.
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Matching eigenvectors as columns, present when requested.
    pub vectors: Option<DenseMatrix>,
}

/// Eigenvalues of a general matrix with the residual of the Schur
/// factorization they were read from.
pub struct GeneralEigen {
    /// Eigenvalues sorted by real part, then imaginary part.
    pub values: Vec<C64>,
    /// ||A - U T U*||_F / ||A||_F for the accumulated Schur form.
    pub schur_residual: f64,
}

/// Eigenvalues and (optionally) eigenvectors of a Hermitian matrix.
///
/// The input must be Hermitian to a small relative tolerance; it is
/// symmetrized exactly before the reduction so roundoff asymmetry cannot
/// leak into the result.
pub fn hermitian_eigs(a: &DenseMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm())
        .fold(0.0f64, f64::max);
    for i in 0..n {
        for j in 0..=i {
            let dev = (a[(i, j)] - a[(j, i)].conj()).norm();
            if dev > HERMITICITY_TOL * (1.0 + scale) {
                return Err(Error::EigenFailure(format!(
                    "matrix is not Hermitian: |a[{i}][{j}] - conj(a[{j}][{i}])| = {dev:.3e}"
                )));
            }
        }
    }
    let mut w = DenseMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut q = if want_vectors {
        Some(DenseMatrix::identity(n))
    } else {
        None
    };

    // Householder tridiagonalization: after step k, column k below the
    // subdiagonal is zero and the trailing block stays Hermitian.
    let mut e = vec![zero(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let xnorm = (0..m)
            .map(|i| w[(k + 1 + i, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = w[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // beta keeps the phase of x0 so v = x - beta e1 never cancels.
        let beta = -phase * xnorm;
        let mut v: Vec<C64> = (0..m).map(|i| w[(k + 1 + i, k)]).collect();
        v[0] -= beta;
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= vnorm;
        }
        // Rank-2 update of the trailing block: with H = I - 2 v v* and
        // B Hermitian, H B H = B - v u* - u v* where u = 2(Bv - (v*Bv) v).
        let mut bv = vec![zero(); m];
        for i in 0..m {
            let mut acc = zero();
            for j in 0..m {
                acc += w[(k + 1 + i, k + 1 + j)] * v[j];
            }
            bv[i] = acc;
        }
        let mu: C64 = (0..m).map(|i| v[i].conj() * bv[i]).sum();
        let u: Vec<C64> = (0..m).map(|i| (bv[i] - mu * v[i]) * 2.0).collect();
        for i in 0..m {
            for j in 0..m {
                let delta = v[i] * u[j].conj() + u[i] * v[j].conj();
                w[(k + 1 + i, k + 1 + j)] -= delta;
            }
        }
        w[(k + 1, k)] = beta;
        w[(k, k + 1)] = beta.conj();
        for i in 1..m {
            w[(k + 1 + i, k)] = zero();
            w[(k, k + 1 + i)] = zero();
        }
        e[k] = beta;
        if let Some(q) = &mut q {
            // Q <- Q H_k touches columns k+1..n only.
            for i in 0..n {
                let s: C64 = (0..m).map(|l| q[(i, k + 1 + l)] * v[l]).sum();
                let s2 = s * 2.0;
                for j in 0..m {
                    let delta = s2 * v[j].conj();
                    q[(i, k + 1 + j)] -= delta;
                }
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    // Diagonal phase scaling D with |p_j| = 1 turns the complex Hermitian
    // tridiagonal into a real symmetric one: D* T D has subdiagonal |e_k|.
    let mut ereal = vec![0.0; n];
    let mut p = C64::new(1.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        let r = e[k].norm();
        ereal[k] = r;
        if r > 0.0 {
            p *= e[k] / r;
        }
        if let Some(q) = &mut q {
            for i in 0..n {
                q[(i, k + 1)] *= p;
            }
        }
    }

    ql_implicit(&mut d, &mut ereal, q.as_mut())?;

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = q.map(|q| DenseMatrix::from_fn(n, n, |i, j| q[(i, order[j])]));
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only; convenience wrapper around [`hermitian_eigs`].
pub fn hermitian_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigs(a, false)?.values)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix,
/// optionally rotating the columns of `q` (which may be complex: the
/// rotations themselves are real).
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut q: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::EigenFailure(format!(
                    "QL iteration for eigenvalue {l} did not converge in {MAX_QL_SWEEPS} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut interrupted = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Underflow mid-sweep: recover and rescan.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    interrupted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
                if let Some(q) = q.as_deref_mut() {
                    for k in 0..q.nrows() {
                        let t = q[(k, i + 1)];
                        q[(k, i + 1)] = q[(k, i)] * s + t * c;
                        q[(k, i)] = q[(k, i)] * c - t * s;
                    }
                }
            }
            if interrupted {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a general complex matrix via Hessenberg reduction and
/// shifted QR, with the Schur residual as a built-in accuracy certificate.
pub fn general_eigenvalues(a: &DenseMatrix) -> Result<GeneralEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(GeneralEigen {
            values: Vec::new(),
            schur_residual: 0.0,
        });
    }
    let mut h = a.clone();
    let mut u = DenseMatrix::identity(n);
    hessenberg(&mut h, &mut u);
    schur_qr(&mut h, &mut u, n)?;

    // Clean the (negligible) subdiagonal so T is exactly triangular, then
    // measure how well A = U T U* actually holds.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = zero();
        }
    }
    let values = {
        let mut v: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    };
    let anorm = a.frobenius_norm();
    let schur_residual = if anorm == 0.0 {
        0.0
    } else {
        let mut recon = u.matmul(&h)?.matmul(&u.adjoint())?;
        recon.add_scaled(C64::new(-1.0, 0.0), a)?;
        recon.frobenius_norm() / anorm
    };
    Ok(GeneralEigen {
        values,
        schur_residual,
    })
}

/// Householder reduction to upper Hessenberg form, accumulating the unitary
/// similarity into `u` (so the input satisfies A = U H U* on return).
fn hessenberg(h: &mut DenseMatrix, u: &mut DenseMatrix) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let xnorm = (0..m)
            .map(|i| h[(k + 1 + i, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * xnorm;
        let mut v: Vec<C64> = (0..m).map(|i| h[(k + 1 + i, k)]).collect();
        v[0] -= beta;
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= vnorm;
        }
        // Left: rows k+1..n over columns k..n.
        for j in k..n {
            let s: C64 = (0..m).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let s2 = s * 2.0;
            for i in 0..m {
                let delta = v[i] * s2;
                h[(k + 1 + i, j)] -= delta;
            }
        }
        // Right: columns k+1..n over all rows.
        for i in 0..n {
            let s: C64 = (0..m).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            let s2 = s * 2.0;
            for j in 0..m {
                let delta = s2 * v[j].conj();
                h[(i, k + 1 + j)] -= delta;
            }
        }
        for i in 0..n {
            let s: C64 = (0..m).map(|j| u[(i, k + 1 + j)] * v[j]).sum();
            let s2 = s * 2.0;
            for j in 0..m {
                let delta = s2 * v[j].conj();
                u[(i, k + 1 + j)] -= delta;
            }
        }
        // The reflected column is beta e1 in exact arithmetic; write it so.
        h[(k + 1, k)] = beta;
        for i in 2..=m {
            h[(k + i, k)] = zero();
        }
    }
}

/// Complex Givens rotation with real cosine: [c, s; -conj(s), c] [a; b] = [r; 0].
fn rot(a: C64, b: C64) -> (f64, C64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, zero());
    }
    let an = a.norm();
    let r = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Shifted QR with deflation on an upper Hessenberg matrix; on success `h`
/// holds an (upper triangular) Schur factor and `u` the accumulated unitary.
fn schur_qr(h: &mut DenseMatrix, u: &mut DenseMatrix, n: usize) -> Result<()> {
    let max_total = 30 * n.max(1);
    let hnorm = h.frobenius_norm();
    let negligible = |h: &DenseMatrix, i: usize| -> bool {
        let sub = h[(i, i - 1)].norm();
        let local = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
        sub <= f64::EPSILON * local || sub <= f64::MIN_POSITIVE.max(1e-300) * hnorm.max(1.0)
    };
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut stall = 0usize;
    while hi > 0 {
        // Scan for the active window [lo, hi].
        let mut lo = hi;
        loop {
            if negligible(h, lo) {
                h[(lo, lo - 1)] = zero();
                break;
            }
            if lo == 1 {
                lo = 0;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stall = 0;
            continue;
        }
        total += 1;
        stall += 1;
        if total > max_total {
            return Err(Error::EigenFailure(format!(
                "QR iteration exceeded {max_total} steps with window [{lo}, {hi}] open"
            )));
        }
        // Wilkinson shift from the trailing 2x2, with an exceptional shift
        // every tenth consecutive step on the same window.
        let sigma = if stall.is_multiple_of(10) {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let aa = h[(hi - 1, hi - 1)];
            let bb = h[(hi - 1, hi)];
            let cc = h[(hi, hi - 1)];
            let dd = h[(hi, hi)];
            let half = (aa - dd) * 0.5;
            let disc = (half * half + bb * cc).sqrt();
            let r1 = (aa + dd) * 0.5 + disc;
            let r2 = (aa + dd) * 0.5 - disc;
            if (r1 - dd).norm() <= (r2 - dd).norm() {
                r1
            } else {
                r2
            }
        };
        // One explicit QR step on the window: factor H - sigma I with
        // Givens rotations, then multiply back in reverse order.
        for i in lo..=hi {
            h[(i, i)] -= sigma;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = rot(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for i in 0..=(k + 1) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + s.conj() * b;
                h[(i, k + 1)] = -s * a + b * c;
            }
            for i in 0..n {
                let a = u[(i, k)];
                let b = u[(i, k + 1)];
                u[(i, k)] = a * c + s.conj() * b;
                u[(i, k + 1)] = -s * a + b * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += sigma;
        }
    }
    Ok(())
}
