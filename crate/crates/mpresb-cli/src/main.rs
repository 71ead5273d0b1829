//! Benchmark CLI for block-preconditioned GMRES on the time-periodic
//! parabolic optimal-control model problem.
//!
//! Subcommands:
//! * `table` - sweep (preconditioner, nu, omega), write results.csv
//!   (deterministic), timings.csv, and table.md, and print the table.
//! * `spectrum` - eigenvalues of R^{-1}Q (structured route), R^{-1}A, or
//!   Q^{-1}A as a scatter CSV plus a one-line summary.
//! * `export` - write the assembled mass matrix, stiffness matrix, and
//!   right-hand side as Matrix Market files with a manifest.
//!
//! Exit code is 0 only when every requested cell completed without an
//! internal error (diverged cells are daggered results, not errors).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpresb::inner::{InnerConfig, InnerMode};
use mpresb::precond::PrecondKind;
use mpresb::spectral::SpectrumTarget;
use mpresb::{
    export_problem, markdown_table, results_csv, run_spectrum, run_table, timings_csv,
    write_spectrum, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "mpresb",
    version,
    about = "Block-preconditioner benchmarks for two-by-two complex systems \
             from time-periodic parabolic optimal control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (preconditioner, nu, omega) iteration-count table
    Table(TableArgs),
    /// Compute the spectrum of a preconditioned operator
    Spectrum(SpectrumArgs),
    /// Export the assembled problem as Matrix Market files
    Export(ExportArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Spatial dimension: 2 or 3
    #[arg(long, default_value_t = 2)]
    dim: usize,

    /// Mesh width: a decimal like 0.03125 or a power like 2^-5
    #[arg(long, default_value = "2^-5", value_parser = parse_h)]
    h: f64,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    mesh: MeshArgs,

    /// Regularization parameter; repeat for several values
    #[arg(long = "nu", default_values_t = vec![1e-2, 1e-4, 1e-6, 1e-8])]
    nu: Vec<f64>,

    /// Frequency; repeat for several values
    #[arg(
        long = "omega",
        default_values_t = vec![1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4]
    )]
    omega: Vec<f64>,

    /// Preconditioner; repeat for several (mpresb, presb, bd, bas)
    #[arg(long = "precond", value_parser = parse_precond,
          default_values_t = PrecondKind::ALL)]
    precond: Vec<PrecondKind>,

    /// GMRES restart length
    #[arg(long, default_value_t = 20)]
    restart: usize,

    /// Relative residual reduction for convergence
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    /// Maximum GMRES iterations before declaring divergence
    #[arg(long, default_value_t = 1000)]
    maxit: usize,

    #[command(flatten)]
    inner: InnerArgs,

    /// Output directory for results.csv, timings.csv, table.md
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct InnerArgs {
    /// Inner solver for the preconditioner blocks: direct or cg
    #[arg(long = "inner", default_value = "direct", value_parser = parse_inner)]
    inner_mode: InnerMode,

    /// Relative tolerance for iterative inner solves
    #[arg(long = "inner-tol", default_value_t = 1e-12)]
    inner_tol: f64,

    /// Iteration cap for iterative inner solves (default: 10n)
    #[arg(long = "inner-maxit")]
    inner_maxit: Option<usize>,
}

impl InnerArgs {
    fn config(&self) -> InnerConfig {
        InnerConfig {
            mode: self.inner_mode,
            tol: self.inner_tol,
            maxit: self.inner_maxit,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    mesh: MeshArgs,

    /// Regularization parameter
    #[arg(long, default_value_t = 1e-2)]
    nu: f64,

    /// Frequency
    #[arg(long, default_value_t = 10.0)]
    omega: f64,

    /// Operator to analyze: rinvq, rinva, or qinva
    #[arg(long, default_value = "rinvq", value_parser = parse_target)]
    target: SpectrumTarget,

    /// Output directory for the scatter CSV and summary
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    mesh: MeshArgs,

    /// Regularization parameter
    #[arg(long, default_value_t = 1e-2)]
    nu: f64,

    /// Frequency
    #[arg(long, default_value_t = 10.0)]
    omega: f64,

    /// Output directory for mass.mtx, stiffness.mtx, rhs.mtx, manifest.txt
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Accepts "2^-5" style powers of two or plain decimals.
fn parse_h(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = if let Some(exp) = t.strip_prefix("2^") {
        let k: i32 = exp
            .parse()
            .map_err(|_| format!("invalid exponent in mesh width '{t}'"))?;
        2f64.powi(k)
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("invalid mesh width '{t}'"))?
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("mesh width must be positive and finite, got '{t}'"))
    }
}

fn parse_precond(s: &str) -> Result<PrecondKind, String> {
    PrecondKind::parse(s).map_err(|e| e.to_string())
}

fn parse_target(s: &str) -> Result<SpectrumTarget, String> {
    SpectrumTarget::parse(s).map_err(|e| e.to_string())
}

fn parse_inner(s: &str) -> Result<InnerMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "direct" => Ok(InnerMode::Direct),
        "cg" => Ok(InnerMode::Iterative),
        other => Err(format!(
            "unknown inner solver '{other}' (expected direct or cg)"
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_table(args: TableArgs) -> mpresb::Result<ExitCode> {
    let cfg = RunConfig {
        dim: args.mesh.dim,
        h: args.mesh.h,
        nu_list: args.nu,
        omega_list: args.omega,
        preconditioners: args.precond,
        restart: args.restart,
        tol: args.tol,
        maxit: args.maxit,
        inner: args.inner.config(),
        seed: 0,
    };
    let rows = run_table(&cfg)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("results.csv"), results_csv(&rows))?;
    fs::write(args.out.join("timings.csv"), timings_csv(&rows))?;
    let md = markdown_table(&cfg, &rows);
    fs::write(args.out.join("table.md"), &md)?;
    print!("{md}");
    let mut errors = 0;
    for row in &rows {
        if let mpresb::CellOutcome::Error(msg) = &row.outcome {
            errors += 1;
            eprintln!(
                "cell error: precond={} nu={:e} omega={:e}: {msg}",
                row.preconditioner.name(),
                row.nu,
                row.omega
            );
        }
    }
    println!(
        "wrote results.csv, timings.csv, table.md to {}",
        args.out.display()
    );
    if errors > 0 {
        eprintln!("{errors} cell(s) failed");
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> mpresb::Result<ExitCode> {
    let run = run_spectrum(args.mesh.dim, args.mesh.h, args.nu, args.omega, args.target)?;
    let path = write_spectrum(&args.out, &run, args.target)?;
    println!("{}", run.summary);
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(args: ExportArgs) -> mpresb::Result<ExitCode> {
    let paths = export_problem(&args.out, args.mesh.dim, args.mesh.h, args.nu, args.omega)?;
    println!(
        "wrote {}, {}, {}, {}",
        paths.mass.display(),
        paths.stiffness.display(),
        paths.rhs.display(),
        paths.manifest.display()
    );
    Ok(ExitCode::SUCCESS)
}
