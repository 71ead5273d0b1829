//! Krylov solvers: restarted GMRES with right preconditioning for the block
//! complex systems, and conjugate gradients for real SPD inner problems.
//!
//! GMRES builds the Arnoldi basis with modified Gram-Schmidt and runs one
//! reorthogonalization pass when cancellation leaves less than 1e-4 of a new
//! basis vector. The recurrence residual |g_{k+1}| is monitored every step;
//! with right preconditioning it estimates the unpreconditioned residual, and
//! the true residual is recomputed from x whenever a cycle ends so convergence
//! is never declared on the recurrence alone.

use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::block::Operator;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Solver-facing contract for preconditioners: v -> P^{-1} v, pure after
/// construction.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>>;
    /// Total inner solves performed so far (diagnostics).
    fn inner_solves(&self) -> usize;
    fn name(&self) -> &'static str;
}

/// Outcome of a Krylov solve. `iterations` counts preconditioned matvecs
/// summed over all restart cycles; residual bookkeeping is relative to ||b||.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub restarts: usize,
    /// Recurrence residual estimate after each iteration.
    pub relative_residuals: Vec<f64>,
    pub converged: bool,
    pub wall_time_seconds: f64,
    /// ||b - A x|| / ||b|| recomputed from the returned x.
    pub final_true_residual: f64,
}

impl SolveReport {
    /// One row per iteration: `iteration,relative_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,relative_residual\n");
        for (i, r) in self.relative_residuals.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, r));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct GmresConfig {
    pub restart: usize,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            restart: 20,
            tol: 1e-8,
            maxit: 1000,
        }
    }
}

/// Subdiagonal threshold (relative to ||b||) below which the Arnoldi
/// recurrence has terminated exactly.
const HAPPY_BREAKDOWN: f64 = 1e-14;

/// Surviving-norm fraction under which modified Gram-Schmidt gets a second
/// pass.
const REORTH_THRESHOLD: f64 = 1e-4;

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .fold(C64::new(0.0, 0.0), |acc, t| acc + t)
}

/// Complex Givens rotation zeroing `b` against `a`: returns (c, s) with
/// c real, |c|^2 + |s|^2 = 1 and -conj(s) a + c b = 0.
pub(crate) fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let t = (an * an + bn * bn).sqrt();
    let c = an / t;
    let s = (a / an) * b.conj() / t;
    (c, s)
}

/// Restarted GMRES with right preconditioning.
///
/// Returns the iterate and a report; non-convergence within `maxit` is a
/// reported state, not an error. `precond = None` solves the unpreconditioned
/// system.
pub fn gmres(
    a: &dyn Operator,
    precond: Option<&dyn Preconditioner>,
    b: &[C64],
    x0: Option<&[C64]>,
    cfg: &GmresConfig,
) -> Result<(Vec<C64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "gmres on an operator of dimension {n} with rhs length {}",
            b.len()
        )));
    }
    if let Some(p) = precond {
        if p.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "preconditioner dimension {} does not match operator dimension {n}",
                p.dim()
            )));
        }
    }
    if cfg.restart == 0 || cfg.maxit == 0 || cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidParameter(
            "gmres needs restart >= 1, maxit >= 1 and tol > 0".into(),
        ));
    }
    let start = Instant::now();
    let mut x = match x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(Error::DimensionMismatch(
                    "initial guess length mismatch".into(),
                ));
            }
            x0.to_vec()
        }
        None => vec![C64::new(0.0, 0.0); n],
    };
    let bnorm = norm(b);
    let mut report = SolveReport {
        iterations: 0,
        restarts: 0,
        relative_residuals: Vec::new(),
        converged: false,
        wall_time_seconds: 0.0,
        final_true_residual: 0.0,
    };
    if bnorm == 0.0 {
        // Zero data: the solution of A x = 0 under a nonsingular operator.
        x.fill(C64::new(0.0, 0.0));
        report.converged = true;
        report.wall_time_seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let true_rel = |x: &[C64], scratch: &mut Vec<C64>| -> Result<f64> {
        a.apply_into(x, scratch)?;
        let mut s = 0.0;
        for i in 0..n {
            s += (b[i] - scratch[i]).norm_sqr();
        }
        Ok(s.sqrt() / bnorm)
    };

    let mut scratch = vec![C64::new(0.0, 0.0); n];
    let mut cycles = 0usize;
    'outer: while report.iterations < cfg.maxit {
        cycles += 1;
        // Cycle residual: r = b - A x (exact, not the recurrence).
        a.apply_into(&x, &mut scratch)?;
        let mut r: Vec<C64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta / bnorm <= cfg.tol {
            report.converged = true;
            break;
        }
        for v in &mut r {
            *v /= beta;
        }
        let mut basis: Vec<Vec<C64>> = vec![r];
        let mut zs: Vec<Vec<C64>> = Vec::new();
        let mut h: Vec<Vec<C64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<C64> = Vec::new();
        let mut g: Vec<C64> = vec![C64::new(beta, 0.0)];

        let update_x = |x: &mut [C64], h: &[Vec<C64>], g: &[C64], zs: &[Vec<C64>], k: usize| {
            // Back-substitute the leading k x k triangle, then x += Z y.
            let mut y = vec![C64::new(0.0, 0.0); k];
            for i in (0..k).rev() {
                let mut sum = g[i];
                for j in i + 1..k {
                    sum -= h[j][i] * y[j];
                }
                y[i] = sum / h[i][i];
            }
            for j in 0..k {
                let yj = y[j];
                for (xi, zi) in x.iter_mut().zip(&zs[j]) {
                    *xi += yj * zi;
                }
            }
        };

        for k in 0..cfg.restart {
            if report.iterations >= cfg.maxit {
                update_x(&mut x, &h, &g, &zs, k);
                break 'outer;
            }
            let z = match precond {
                Some(p) => p.apply(&basis[k])?,
                None => basis[k].clone(),
            };
            let mut w = a.apply(&z)?;
            zs.push(z);
            report.iterations += 1;

            let w_pre = norm(&w);
            let mut col = Vec::with_capacity(k + 2);
            for vi in basis.iter() {
                let hik = dot(vi, &w);
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
                col.push(hik);
            }
            let mut w_norm = norm(&w);
            if w_norm < REORTH_THRESHOLD * w_pre {
                for (i, vi) in basis.iter().enumerate() {
                    let corr = dot(vi, &w);
                    for (wj, vj) in w.iter_mut().zip(vi) {
                        *wj -= corr * vj;
                    }
                    col[i] += corr;
                }
                w_norm = norm(&w);
            }
            col.push(C64::new(w_norm, 0.0));

            // Previous rotations, then a new one to keep H triangular.
            for i in 0..k {
                let t1 = cs[i] * col[i] + sn[i] * col[i + 1];
                let t2 = -sn[i].conj() * col[i] + cs[i] * col[i + 1];
                col[i] = t1;
                col[i + 1] = t2;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = C64::new(0.0, 0.0);
            cs.push(c);
            sn.push(s);
            let gk = g[k];
            g[k] = c * gk;
            g.push(-s.conj() * gk);
            h.push(col);

            let rel = g[k + 1].norm() / bnorm;
            report.relative_residuals.push(rel);

            let happy = w_norm <= HAPPY_BREAKDOWN * bnorm;
            if rel <= cfg.tol || happy {
                update_x(&mut x, &h, &g, &zs, k + 1);
                let t = true_rel(&x, &mut scratch)?;
                if t <= cfg.tol || happy {
                    report.converged = true;
                    break 'outer;
                }
                // Recurrence was optimistic; restart from the corrected x.
                continue 'outer;
            }
            if k + 1 == cfg.restart {
                update_x(&mut x, &h, &g, &zs, cfg.restart);
            } else {
                for v in &mut w {
                    *v /= w_norm;
                }
                basis.push(w);
            }
        }
    }

    report.restarts = cycles.saturating_sub(1);
    report.final_true_residual = true_rel(&x, &mut scratch)?;
    if report.final_true_residual <= cfg.tol {
        report.converged = true;
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Conjugate gradients for a real SPD sparse matrix.
///
/// Fails with `NotPositiveDefinite` if a search direction has nonpositive
/// curvature, and reports (not errors) when `maxit` runs out.
pub fn cg(a: &SparseMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidParameter("cg needs a square matrix".into()));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cg on order {n} with rhs length {}",
            b.len()
        )));
    }
    let start = Instant::now();
    let mut report = SolveReport {
        iterations: 0,
        restarts: 0,
        relative_residuals: Vec::new(),
        converged: false,
        wall_time_seconds: 0.0,
        final_true_residual: 0.0,
    };
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0f64; n];
    if bnorm == 0.0 {
        report.converged = true;
        report.wall_time_seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rho = r.iter().map(|v| v * v).sum::<f64>();
    while report.iterations < maxit {
        let q = a.apply_real(&p)?;
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if pq <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "nonpositive curvature {pq:.3e} in cg"
            )));
        }
        let alpha = rho / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        report.iterations += 1;
        let rho_new: f64 = r.iter().map(|v| v * v).sum();
        let rel = rho_new.sqrt() / bnorm;
        report.relative_residuals.push(rel);
        if rel <= tol {
            report.converged = true;
            break;
        }
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let ax = a.apply_real(&x)?;
    report.final_true_residual = ax
        .iter()
        .zip(b)
        .map(|(l, r)| (l - r) * (l - r))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    report.converged = report.converged && report.final_true_residual <= 10.0 * tol;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{DenseLu, DenseMatrix};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    struct DenseOp(DenseMatrix);

    impl Operator for DenseOp {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
            let r = self.0.matvec(x)?;
            y.copy_from_slice(&r);
            Ok(())
        }
    }

    struct LuPrecond {
        lu: DenseLu,
        n: usize,
        count: AtomicUsize,
    }

    impl LuPrecond {
        fn of(m: &DenseMatrix) -> Self {
            LuPrecond {
                lu: m.lu().unwrap(),
                n: m.nrows(),
                count: AtomicUsize::new(0),
            }
        }
    }

    impl Preconditioner for LuPrecond {
        fn dim(&self) -> usize {
            self.n
        }
        fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
            self.count.fetch_add(1, Ordering::Relaxed);
            self.lu.solve(v)
        }
        fn inner_solves(&self) -> usize {
            self.count.load(Ordering::Relaxed)
        }
        fn name(&self) -> &'static str {
            "lu"
        }
    }

    fn test_matrix(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(3.0 + i as f64 * 0.1, 0.5)
            } else {
                c(
                    0.5 / (1.0 + (i as f64 - j as f64).abs()),
                    0.1 * ((i + j) % 3) as f64,
                )
            }
        })
    }

    #[test]
    fn unpreconditioned_gmres_solves_small_system() {
        let a = test_matrix(8);
        let x_true: Vec<C64> = (0..8).map(|i| c(i as f64, -(i as f64) / 2.0)).collect();
        let b = a.matvec(&x_true).unwrap();
        let op = DenseOp(a);
        let cfg = GmresConfig {
            restart: 8,
            tol: 1e-12,
            maxit: 100,
        };
        let (x, rep) = gmres(&op, None, &b, None, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.final_true_residual <= 1e-12);
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).norm() <= 1e-9);
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_at_most_two_iterations() {
        let a = test_matrix(12);
        let p = LuPrecond::of(&a);
        let b: Vec<C64> = (0..12).map(|i| c(1.0, i as f64)).collect();
        let op = DenseOp(a);
        let cfg = GmresConfig::default();
        let (_, rep) = gmres(&op, Some(&p), &b, None, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2, "took {} iterations", rep.iterations);
        assert_eq!(p.inner_solves(), rep.iterations);
    }

    #[test]
    fn restarting_still_converges_and_counts_cycles() {
        let a = test_matrix(10);
        let b: Vec<C64> = (0..10).map(|i| c((i as f64).sin(), 0.3)).collect();
        let op = DenseOp(a);
        let cfg = GmresConfig {
            restart: 3,
            tol: 1e-10,
            maxit: 200,
        };
        let (x, rep) = gmres(&op, None, &b, None, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.restarts >= 1);
        let r = op.apply(&x).unwrap();
        let res: f64 = r
            .iter()
            .zip(&b)
            .map(|(l, r)| (l - r).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res / norm(&b) <= 1e-10);
    }

    #[test]
    fn residual_estimates_never_increase_within_a_cycle() {
        let a = test_matrix(16);
        let b: Vec<C64> = (0..16).map(|i| c(1.0 / (1.0 + i as f64), -0.25)).collect();
        let op = DenseOp(a);
        let cfg = GmresConfig {
            restart: 5,
            tol: 1e-12,
            maxit: 100,
        };
        let (_, rep) = gmres(&op, None, &b, None, &cfg).unwrap();
        for chunk in rep.relative_residuals.chunks(5) {
            for w in chunk.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn maxit_exhaustion_reports_non_convergence() {
        let a = test_matrix(16);
        let b: Vec<C64> = (0..16).map(|i| c(1.0 + i as f64, 0.0)).collect();
        let op = DenseOp(a);
        let cfg = GmresConfig {
            restart: 2,
            tol: 1e-15,
            maxit: 3,
        };
        let (_, rep) = gmres(&op, None, &b, None, &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
        assert!(rep.final_true_residual > 0.0);
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let a = test_matrix(4);
        let op = DenseOp(a);
        let b = vec![c(0.0, 0.0); 4];
        let (x, rep) = gmres(&op, None, &b, None, &GmresConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|v| v.re == 0.0 && v.im == 0.0));
    }

    #[test]
    fn initial_guess_is_honored() {
        let a = test_matrix(6);
        let x_true: Vec<C64> = (0..6).map(|i| c(2.0 - i as f64, 0.5)).collect();
        let b = a.matvec(&x_true).unwrap();
        let op = DenseOp(a);
        // Start at the solution: zero iterations needed.
        let cfg = GmresConfig::default();
        let (_, rep) = gmres(&op, None, &b, Some(&x_true), &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn report_serializes_iteration_residual_rows() {
        let rep = SolveReport {
            iterations: 2,
            restarts: 0,
            relative_residuals: vec![0.5, 1e-9],
            converged: true,
            wall_time_seconds: 0.1,
            final_true_residual: 1e-9,
        };
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,relative_residual");
        assert!(lines[1].starts_with("1,5.0000000000000000e-1"));
        assert!(lines[2].starts_with("2,"));
    }

    #[test]
    fn givens_zeroes_second_component() {
        for (a, b) in [
            (c(1.0, 2.0), c(-3.0, 0.5)),
            (c(0.0, 0.0), c(1.0, 1.0)),
            (c(2.0, -1.0), c(0.0, 0.0)),
        ] {
            let (cc, s) = givens(a, b);
            let z = -s.conj() * a + cc * b;
            assert!(z.norm() <= 1e-14);
            assert!((cc * cc + s.norm_sqr() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn cg_solves_poisson_chain() {
        // 1D Dirichlet Laplacian, solution recovered to direct accuracy.
        let n = 64;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_real_triplets(n, n, trips).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64) - 6.0).collect();
        let b = a.apply_real(&x_true).unwrap();
        let (x, rep) = cg(&a, &b, 1e-12, 10 * n).unwrap();
        assert!(rep.converged);
        assert!(rep.final_true_residual <= 1e-12);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn cg_rejects_indefinite_matrices() {
        let a = SparseMatrix::from_real_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
        )
        .unwrap();
        // [1, -1] is the eigenvector of the negative eigenvalue, so the very
        // first search direction exposes p' A p < 0.
        let r = cg(&a, &[1.0, -1.0], 1e-10, 100);
        assert!(matches!(r, Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn cg_zero_rhs_is_trivial() {
        let a = SparseMatrix::identity(5);
        let (x, rep) = cg(&a, &[0.0; 5], 1e-12, 10).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
