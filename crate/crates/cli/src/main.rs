//! `mps`: solve configured problems, run property suites, and tabulate
//! manufactured-solution convergence.
//!
//! Exit codes: 0 success, 1 a suite or convergence threshold failed,
//! 2 configuration or usage error, 3 numeric failure (including a solve
//! that did not converge).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mps_core::config::RunConfig;
use mps_core::solvers::{convergence_study, ManufacturedCase};
use mps_core::verify::{run_suite, Suite};
use mps_core::MpsError;

#[derive(Parser)]
#[command(name = "mps", version, about = "Nonlocal multi-phase variable-exponent Dirichlet solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON run configuration.
    Solve {
        config: PathBuf,
        /// Directory for the solution CSV and report JSON (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time in the report (makes reports run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Run a property suite: modular, operator, monotone, or solver.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances per property (suite defaults when omitted).
        #[arg(long)]
        cases: Option<usize>,
        /// Also write the suite report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Manufactured-solution convergence table.
    Convergence {
        case: String,
        /// Comma-separated cells per axis, e.g. 16,32,64.
        #[arg(long, default_value = "16,32,64")]
        meshes: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<MpsError> for Failure {
    fn from(e: MpsError) -> Self {
        match e {
            MpsError::Numeric(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { config, out, timing } => solve(&config, out.as_deref(), timing),
        Command::Verify { suite, seed, cases, json } => verify(&suite, seed, cases, json.as_deref()),
        Command::Convergence { case, meshes, csv } => convergence(&case, &meshes, csv.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn solve(path: &Path, out: Option<&Path>, timing: bool) -> Result<u8, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut run = RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    run.solver.record_time |= timing;
    let prepared = run.prepare()?;
    let (u, report) = prepared.solve()?;

    let dir = out.unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let sol_path = dir.join(&prepared.config.output.solution);
    let file = fs::File::create(&sol_path).map_err(|e| io_failure(&sol_path, e))?;
    let values = prepared.space.full_nodal(&u);
    let mut w = BufWriter::new(file);
    prepared.space.mesh().write_nodes_csv(&mut w, Some(&values)).map_err(|e| io_failure(&sol_path, e))?;
    w.flush().map_err(|e| io_failure(&sol_path, e))?;
    let rep_path = dir.join(&prepared.config.output.report);
    fs::write(&rep_path, report.to_json() + "\n").map_err(|e| io_failure(&rep_path, e))?;

    println!(
        "converged={} iterations={} residual={:e} norm={:e}",
        report.converged,
        report.iterations,
        report.final_residual(),
        report.norm
    );
    println!("wrote {} and {}", sol_path.display(), rep_path.display());
    if report.converged {
        Ok(0)
    } else {
        Err(Failure::Numeric(report.message.unwrap_or_else(|| "solve did not converge".into())))
    }
}

fn verify(suite: &str, seed: u64, cases: Option<usize>, json: Option<&Path>) -> Result<u8, Failure> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, seed, cases)?;
    print!("{}", report.render());
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&report).expect("suite report serializes");
        fs::write(path, text + "\n").map_err(|e| io_failure(path, e))?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn parse_meshes(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|e| Failure::Usage(format!("bad mesh size '{t}': {e}"))))
        .collect()
}

fn convergence(case: &str, meshes: &str, csv: Option<&Path>) -> Result<u8, Failure> {
    let case: ManufacturedCase = case.parse()?;
    let meshes = parse_meshes(meshes)?;
    let table = convergence_study(case, &meshes, &Default::default())?;
    match csv {
        Some(path) => fs::write(path, table.to_csv()).map_err(|e| io_failure(path, e))?,
        None => print!("{}", table.to_csv()),
    }
    eprintln!("{}: {} ({})", case, if table.passed { "PASS" } else { "FAIL" }, case.criterion());
    Ok(if table.passed { 0 } else { 1 })
}
