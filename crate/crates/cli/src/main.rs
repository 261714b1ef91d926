//! `lagput`: price lagged American puts and run the convergence studies from
//! a JSON scenario file.
//!
//! Exit codes: 0 ok, 2 invalid input, 3 solver failure, 4 a study or
//! selftest check failed, 1 I/O trouble.

mod commands;
mod output;
mod scenario;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scenario::{Scenario, StudyName};

/// Environment variable holding the number of worker threads.
const WORKERS_VAR: &str = "LAGPUT_WORKERS";

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Solver(String),
    Io(String),
}

impl From<lagput::Error> for Failure {
    fn from(e: lagput::Error) -> Self {
        use lagput::Error::*;
        match e {
            InvalidParameter(_) | Domain(_) | SizeGuard(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "lagput", version, about = "American puts with delivery lags")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario's contract and write surface, boundary and summary.
    Price {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the studies and write a pass/fail report.
    Study {
        /// Overrides the scenario's study name.
        #[arg(long, value_enum)]
        name: Option<StudyName>,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle cross-checks at reduced sizes.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_theta: bool,
    },
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("{WORKERS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Solver(e.to_string()))
}

fn prepare(scenario: &Path, out: Option<&PathBuf>) -> Result<(Scenario, PathBuf), Failure> {
    let sc = Scenario::load(scenario)?;
    let dir = sc.out_dir(out.map(PathBuf::as_path))?;
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok((sc, dir))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_workers()?;
    match cli.command {
        Command::Price { scenario, out } => {
            let (sc, dir) = prepare(&scenario, out.as_ref())?;
            commands::price(&sc, &dir)?;
            Ok(true)
        }
        Command::Study { name, scenario, out } => {
            let (sc, dir) = prepare(&scenario, out.as_ref())?;
            let name = name
                .or(sc.study.name)
                .ok_or_else(|| Failure::Input("no study selected: pass --name or set study.name".into()))?;
            commands::study(&sc, name, &dir)
        }
        Command::Selftest { corrupt_theta } => Ok(selftest::run(corrupt_theta)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
