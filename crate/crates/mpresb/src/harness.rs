//! Benchmark harness: parameter-grid table runs, spectrum runs, and
//! problem export.
//!
//! A table run sweeps (preconditioner, nu, omega) cells over one mesh,
//! solving each cell with restarted right-preconditioned GMRES, and renders
//! three views of the result:
//!
//! * `results_csv` - fully deterministic (no wall times): rerunning an
//!   identical configuration reproduces it bitwise.
//! * `timings_csv` - the wall times, kept separate precisely so the results
//!   file can stay deterministic.
//! * `markdown_table` - one row per (preconditioner, nu), one column per
//!   omega, each cell `iterations(seconds)`, with a dagger for runs that
//!   did not reach the tolerance within the iteration budget.
//!
//! Cells are independent problems; with the `parallel` feature they run on
//! rayon. Every cell is deterministic regardless of scheduling, and the
//! output order never depends on thread timing. Cell failures are isolated:
//! an assembly or solver error becomes an ERROR row and the run continues.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::block::Operator;
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, build_mesh, ProblemInstance};
use crate::inner::InnerConfig;
use crate::krylov::{gmres, GmresConfig, SolveReport};
use crate::mm;
use crate::precond::{build as build_preconditioner, PrecondKind};
use crate::spectral::{
    imaginary_bounds, scatter_csv, spectrum, ImaginaryBounds, SpectrumReport, SpectrumTarget,
};

/// Configuration of one table run. The defaults reproduce the reference
/// protocol: GMRES(20), zero initial guess, relative residual reduction
/// 1e-8, at most 1000 iterations, direct inner solves.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub h: f64,
    pub nu_list: Vec<f64>,
    pub omega_list: Vec<f64>,
    pub preconditioners: Vec<PrecondKind>,
    pub restart: usize,
    pub tol: f64,
    pub maxit: usize,
    pub inner: InnerConfig,
    /// Reserved; runs are deterministic and consume no randomness.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            h: 1.0 / 32.0,
            nu_list: vec![1e-2, 1e-4, 1e-6, 1e-8],
            omega_list: vec![1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4],
            preconditioners: PrecondKind::ALL.to_vec(),
            restart: 20,
            tol: 1e-8,
            maxit: 1000,
            inner: InnerConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.nu_list.is_empty() || self.omega_list.is_empty() || self.preconditioners.is_empty()
        {
            return Err(Error::InvalidParameter(
                "nu, omega, and preconditioner lists must be nonempty".into(),
            ));
        }
        Ok(())
    }

    fn gmres_config(&self) -> GmresConfig {
        GmresConfig {
            restart: self.restart,
            tol: self.tol,
            maxit: self.maxit,
        }
    }
}

/// What happened in one table cell.
pub enum CellOutcome {
    /// GMRES ran to completion (converged or hit the iteration budget).
    Solved(SolveReport),
    /// Assembly, factorization, or the solver itself failed.
    Error(String),
}

/// One (preconditioner, nu, omega) cell of a table run.
pub struct TableRow {
    pub preconditioner: PrecondKind,
    pub nu: f64,
    pub omega: f64,
    pub outcome: CellOutcome,
}

impl TableRow {
    pub fn is_error(&self) -> bool {
        matches!(self.outcome, CellOutcome::Error(_))
    }

    pub fn report(&self) -> Option<&SolveReport> {
        match &self.outcome {
            CellOutcome::Solved(r) => Some(r),
            CellOutcome::Error(_) => None,
        }
    }
}

struct CellJob {
    preconditioner: PrecondKind,
    nu: f64,
    omega: f64,
}

fn run_cell(cfg: &RunConfig, assembled: &Assembled, job: &CellJob) -> TableRow {
    let outcome = (|| -> Result<SolveReport> {
        let problem = ProblemInstance::from_parts(
            assembled.mesh.clone(),
            assembled.mass.clone(),
            assembled.stiffness.clone(),
            job.nu,
            job.omega,
        )?;
        let precond = build_preconditioner(job.preconditioner, &problem, &cfg.inner)?;
        let op = problem.operator();
        let (_, report) = gmres(
            &op as &dyn Operator,
            Some(precond.as_ref()),
            &problem.rhs,
            None,
            &cfg.gmres_config(),
        )?;
        Ok(report)
    })();
    TableRow {
        preconditioner: job.preconditioner,
        nu: job.nu,
        omega: job.omega,
        outcome: match outcome {
            Ok(report) => CellOutcome::Solved(report),
            Err(e) => CellOutcome::Error(e.to_string()),
        },
    }
}

struct Assembled {
    mesh: crate::fem::Mesh,
    mass: Arc<crate::sparse::SparseMatrix>,
    stiffness: Arc<crate::sparse::SparseMatrix>,
}

fn assemble_once(cfg: &RunConfig) -> Result<Assembled> {
    let mesh = build_mesh(cfg.dim, cfg.h)?;
    Ok(Assembled {
        mass: Arc::new(assemble_mass(&mesh)?),
        stiffness: Arc::new(assemble_stiffness(&mesh)?),
        mesh,
    })
}

fn cell_jobs(cfg: &RunConfig) -> Vec<CellJob> {
    let mut jobs = Vec::new();
    for &preconditioner in &cfg.preconditioners {
        for &nu in &cfg.nu_list {
            for &omega in &cfg.omega_list {
                jobs.push(CellJob {
                    preconditioner,
                    nu,
                    omega,
                });
            }
        }
    }
    jobs
}

/// Runs the full table, cells in parallel when the `parallel` feature is
/// enabled. Row order is always preconditioner-major, then nu, then omega.
pub fn run_table(cfg: &RunConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let assembled = assemble_once(cfg)?;
    let jobs = cell_jobs(cfg);
    #[cfg(feature = "parallel")]
    {
        Ok(jobs
            .par_iter()
            .map(|job| run_cell(cfg, &assembled, job))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(jobs
            .iter()
            .map(|job| run_cell(cfg, &assembled, job))
            .collect())
    }
}

/// Sequential twin of [`run_table`], kept unconditionally for comparison
/// benches and determinism cross-checks.
pub fn run_table_seq(cfg: &RunConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let assembled = assemble_once(cfg)?;
    Ok(cell_jobs(cfg)
        .iter()
        .map(|job| run_cell(cfg, &assembled, job))
        .collect())
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n'], ";")
}

/// Deterministic results CSV: no wall-clock columns, so bytes are
/// reproducible run over run.
pub fn results_csv(rows: &[TableRow]) -> String {
    let mut out =
        String::from("preconditioner,nu,omega,status,iterations,final_relative_residual,detail\n");
    for row in rows {
        match &row.outcome {
            CellOutcome::Solved(r) => {
                let status = if r.converged { "converged" } else { "diverged" };
                writeln!(
                    out,
                    "{},{:e},{:e},{},{},{:.16e},",
                    row.preconditioner.name(),
                    row.nu,
                    row.omega,
                    status,
                    r.iterations,
                    r.final_true_residual,
                )
                .expect("writing to a String cannot fail");
            }
            CellOutcome::Error(msg) => {
                writeln!(
                    out,
                    "{},{:e},{:e},error,,,{}",
                    row.preconditioner.name(),
                    row.nu,
                    row.omega,
                    sanitize(msg),
                )
                .expect("writing to a String cannot fail");
            }
        }
    }
    out
}

/// Wall-clock companion to [`results_csv`]; intentionally separate because
/// times vary between runs.
pub fn timings_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("preconditioner,nu,omega,wall_time_seconds\n");
    for row in rows {
        let time = match &row.outcome {
            CellOutcome::Solved(r) => format!("{:.6e}", r.wall_time_seconds),
            CellOutcome::Error(_) => String::new(),
        };
        writeln!(
            out,
            "{},{:e},{:e},{}",
            row.preconditioner.name(),
            row.nu,
            row.omega,
            time
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Markdown table in the reference layout: one row per (preconditioner,
/// nu), one column per omega, cells `iterations(seconds)`, dagger when the
/// budget ran out.
pub fn markdown_table(cfg: &RunConfig, rows: &[TableRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "GMRES({}) iterations (wall seconds), dim={}, h={:e}, tol={:e}, maxit={}",
        cfg.restart, cfg.dim, cfg.h, cfg.tol, cfg.maxit
    )
    .expect("writing to a String cannot fail");
    out.push('\n');
    out.push_str("| preconditioner | nu |");
    for &omega in &cfg.omega_list {
        write!(out, " omega={omega:e} |").expect("writing to a String cannot fail");
    }
    out.push('\n');
    out.push_str("|---|---|");
    for _ in &cfg.omega_list {
        out.push_str("---|");
    }
    out.push('\n');
    let mut index = 0;
    for &kind in &cfg.preconditioners {
        for &nu in &cfg.nu_list {
            write!(out, "| {} | {:e} |", kind.name(), nu).expect("writing to a String cannot fail");
            for _ in &cfg.omega_list {
                let row = &rows[index];
                debug_assert_eq!(row.preconditioner, kind);
                debug_assert_eq!(row.nu, nu);
                index += 1;
                let cell = match &row.outcome {
                    CellOutcome::Solved(r) if r.converged => {
                        format!("{}({:.2})", r.iterations, r.wall_time_seconds)
                    }
                    CellOutcome::Solved(_) => "\u{2020}".to_string(),
                    CellOutcome::Error(_) => "ERROR".to_string(),
                };
                write!(out, " {cell} |").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
    }
    out
}

/// A spectrum run: the eigenvalues, the containment interval when the
/// target admits one, and a one-line summary.
pub struct SpectrumRun {
    pub report: SpectrumReport,
    pub bounds: Option<ImaginaryBounds>,
    pub summary: String,
}

/// Computes the spectrum of the requested preconditioned operator for one
/// (nu, omega) and summarizes its extent.
pub fn run_spectrum(
    dim: usize,
    h: f64,
    nu: f64,
    omega: f64,
    target: SpectrumTarget,
) -> Result<SpectrumRun> {
    let problem = crate::fem::build_system(dim, h, nu, omega)?;
    let report = spectrum(&problem, target)?;
    let bounds = match target {
        SpectrumTarget::RInvQ => Some(imaginary_bounds(&problem)?),
        _ => None,
    };
    let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &report.eigenvalues {
        re_min = re_min.min(v.re);
        re_max = re_max.max(v.re);
        im_min = im_min.min(v.im);
        im_max = im_max.max(v.im);
    }
    let mut summary = format!(
        "target={} n={} eigenvalues={} re=[{re_min:.6e}, {re_max:.6e}] im=[{im_min:.6e}, {im_max:.6e}] max_residual={:.3e}",
        target.name(),
        problem.n(),
        report.eigenvalues.len(),
        report.max_residual,
    );
    if let Some(b) = &bounds {
        write!(summary, " im_bounds=[{:.6e}, {:.6e}]", b.lower, b.upper)
            .expect("writing to a String cannot fail");
    }
    Ok(SpectrumRun {
        report,
        bounds,
        summary,
    })
}

/// Writes a spectrum scatter CSV next to a `.summary.txt` companion and
/// returns the CSV path.
pub fn write_spectrum(dir: &Path, run: &SpectrumRun, target: SpectrumTarget) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("spectrum_{}.csv", target.name()));
    fs::write(&csv_path, scatter_csv(&run.report.eigenvalues))?;
    let summary_path = dir.join(format!("spectrum_{}.summary.txt", target.name()));
    fs::write(&summary_path, format!("{}\n", run.summary))?;
    Ok(csv_path)
}

/// Paths produced by [`export_problem`].
pub struct ExportPaths {
    pub mass: PathBuf,
    pub stiffness: PathBuf,
    pub rhs: PathBuf,
    pub manifest: PathBuf,
}

/// Exports one assembled problem as Matrix Market files plus a `key=value`
/// manifest; the files round-trip bit-exactly through the readers in
/// [`crate::mm`].
pub fn export_problem(dir: &Path, dim: usize, h: f64, nu: f64, omega: f64) -> Result<ExportPaths> {
    let problem = crate::fem::build_system(dim, h, nu, omega)?;
    fs::create_dir_all(dir)?;
    let paths = ExportPaths {
        mass: dir.join("mass.mtx"),
        stiffness: dir.join("stiffness.mtx"),
        rhs: dir.join("rhs.mtx"),
        manifest: dir.join("manifest.txt"),
    };
    mm::write_sparse(&paths.mass, &problem.mass)?;
    mm::write_sparse(&paths.stiffness, &problem.stiffness)?;
    mm::write_vector(&paths.rhs, &problem.rhs)?;
    let manifest = format!(
        "dim={}\nh={:.16e}\nnu={:.16e}\nomega={:.16e}\nn={}\n",
        dim,
        h,
        nu,
        omega,
        problem.n()
    );
    fs::write(&paths.manifest, manifest)?;
    Ok(paths)
}
