//! Command-line interface: eigen / solve / branch / check / relax.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical
//! non-convergence, 3 hypothesis failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use duffing::bvp::{solve_branch, solve_duffing};
use duffing::config::Config;
use duffing::eigen::{lambda_n, pi_p, EigenParams};
use duffing::error::Error;
use duffing::hypothesis::{compile_report, HypothesisReport};
use duffing::output;
use duffing::relaxation::relax_experiment;

#[derive(Parser)]
#[command(
    name = "duffing",
    about = "Solvers for quasilinear two-point boundary value problems with set-valued forcing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the eigenvalue table (n, lambda_n, pi_p) as CSV.
    Eigen {
        /// Growth exponent p > 1.
        #[arg(long)]
        p: f64,
        /// Interval length b > 0.
        #[arg(long)]
        b: f64,
        /// Number of eigenvalues to print.
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Write the table to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the inclusion described by a JSON config; write trajectory CSV
    /// plus a JSON sidecar.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the sidecar replaces the extension with .json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the homotopy branch u = lambda K(N(u)) and write one CSV row
    /// per branch point.
    Branch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile the admissibility report and print it as JSON.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the relaxation experiment; write per-level CSV and optional SVG.
    Relax {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG plot of distance against level.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::FixedPointDidNotConverge { .. } | Error::ShootingDiverged => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> duffing::Result<ExitCode> {
    match cli.command {
        Command::Eigen { p, b, n, out } => cmd_eigen(p, b, n, out.as_deref()),
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::Branch { config, out } => cmd_branch(&config, &out),
        Command::Check { config, out } => cmd_check(&config, out.as_deref()),
        Command::Relax { config, out, svg } => cmd_relax(&config, &out, svg.as_deref()),
    }
}

fn cmd_eigen(p: f64, b: f64, n: u32, out: Option<&Path>) -> duffing::Result<ExitCode> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let params = EigenParams::new(p, b, 1)?;
    let pip = pi_p(p)?;
    let mut rows = Vec::with_capacity(n as usize);
    for k in 1..=n {
        rows.push((k, lambda_n(&params, k)?, pip));
    }
    let csv = output::eigen_csv(&rows);
    match out {
        Some(path) => output::write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn hypotheses_for(cfg: &Config) -> duffing::Result<HypothesisReport> {
    let prob = cfg.build_problem()?;
    let witness = cfg.build_witness()?;
    compile_report(&prob, &witness, cfg.check_eta(), cfg.solver.seed)
}

/// A-priori bound derived from the compiled report, when available.
fn apriori_from(report: &HypothesisReport) -> Option<f64> {
    report.constants.apriori
}

fn cmd_solve(config_path: &Path, out: &Path) -> duffing::Result<ExitCode> {
    let cfg = Config::from_file(config_path)?;
    let prob = cfg.build_problem()?;
    let hypotheses = hypotheses_for(&cfg)?;
    let mut opts = cfg.solver_options()?;
    opts.apriori = apriori_from(&hypotheses);
    let (report, converged) = match solve_duffing(&prob, &opts) {
        Ok(rep) => (rep, true),
        Err(Error::FixedPointDidNotConverge { last }) => (*last, false),
        Err(e) => return Err(e),
    };
    output::write_atomic(out, &output::solution_csv(&report))?;
    let sidecar = output::solve_sidecar_json(&report, prob.p, Some(&hypotheses))?;
    output::write_atomic(&out.with_extension("json"), &sidecar)?;
    if converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "error: fixed point did not converge (try smaller damping or warm-starting along a branch)"
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_branch(config_path: &Path, out: &Path) -> duffing::Result<ExitCode> {
    let cfg = Config::from_file(config_path)?;
    let prob = cfg.build_problem()?;
    let lambdas = cfg
        .branch
        .as_ref()
        .map(|b| b.lambdas.clone())
        .ok_or_else(|| Error::Config("config has no branch section".into()))?;
    let hypotheses = hypotheses_for(&cfg)?;
    let mut opts = cfg.solver_options()?;
    opts.apriori = apriori_from(&hypotheses);
    let points = solve_branch(&prob, &lambdas, &opts)?;
    output::write_atomic(out, &output::branch_csv(&points, prob.p)?)?;
    if points.iter().all(|pt| pt.report.converged) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "error: fixed point did not converge on at least one branch point (try smaller damping or a denser lambda grid)"
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_check(config_path: &Path, out: Option<&Path>) -> duffing::Result<ExitCode> {
    let cfg = Config::from_file(config_path)?;
    let report = hypotheses_for(&cfg)?;
    let json = report.to_json();
    println!("{json}");
    if let Some(path) = out {
        output::write_atomic(path, &json)?;
    }
    // The required flags depend on what the configuration asks for: the
    // matching existence regime always, the relaxation regime only when a
    // relax section is present.
    let prob = cfg.build_problem()?;
    let mut ok = if prob.multimap.is_convex() {
        report.theorems.convex_existence
    } else {
        report.theorems.nonconvex_existence
    };
    if cfg.relax.is_some() {
        ok = ok && report.theorems.relaxation_density;
    }
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: hypotheses fail");
        Ok(ExitCode::from(3))
    }
}

fn cmd_relax(config_path: &Path, out: &Path, svg: Option<&Path>) -> duffing::Result<ExitCode> {
    let cfg = Config::from_file(config_path)?;
    let relax_cfg = cfg
        .relax_config()?
        .ok_or_else(|| Error::Config("config has no relax section".into()))?;
    let target = cfg.relax.as_ref().map(|r| r.target).unwrap_or(1e-2);
    let outcome = relax_experiment(&relax_cfg)?;
    output::write_atomic(out, &output::relax_csv(&outcome))?;
    if let Some(path) = svg {
        output::write_atomic(path, &output::relax_svg(&outcome))?;
    }
    if outcome.levels.iter().any(|l| !l.converged) {
        eprintln!("error: fixed point did not converge on at least one level");
        return Ok(ExitCode::from(2));
    }
    let final_distance = outcome
        .levels
        .last()
        .map(|l| l.c1_distance)
        .unwrap_or(f64::INFINITY);
    if final_distance <= target {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: final distance {final_distance:.3e} exceeds target {target:.3e}");
        Ok(ExitCode::from(2))
    }
}
