//! `uflow`: batch front end for the gradient flows and their applications.
//!
//! Exit codes: 0 success, 1 input error, 2 not converged, 3 internal
//! invariant violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "uflow", version, about = "Riemannian gradient flows on unitary groups and orbits")]
struct Cli {
    /// Worker threads for restarts and sweeps. UFLOW_JOBS takes precedence.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a group flow from a JSON config.
    Flow(FlowArgs),
    /// Run a double-bracket flow (kind U1P or U1KP) from a JSON config.
    Dbflow(FlowArgs),
    /// Distance to the product states along a state family.
    Sweep {
        #[arg(long, value_parser = ["3q", "4q"])]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        s_min: f64,
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local reversibility of a Hamiltonian given as a JSON spec.
    Reversibility {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Time for the pointwise mode.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best rank-1 approximation of a tensor file.
    Rank1 {
        tensor: PathBuf,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also run the higher-order power method and report both.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension of the Lie algebra generated by a list of matrices.
    Controllability {
        generators: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct FlowArgs {
    config: PathBuf,
    /// Result JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV of the best restart.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Joint,
    Pointwise,
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Ok,
    NotConverged,
}

fn jobs(flag: Option<usize>) -> Result<Option<usize>, String> {
    match std::env::var("UFLOW_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("UFLOW_JOBS must be a positive integer, got {v:?}")),
        },
        Err(_) => match flag {
            Some(0) => Err("--jobs must be positive".into()),
            other => Ok(other),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match jobs(cli.jobs) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("uflow: cannot start {n} worker threads: {e}");
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("uflow: {msg}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("uflow: not converged");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("uflow: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
