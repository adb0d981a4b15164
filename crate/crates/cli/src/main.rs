//! `qvlab`: scenario runner for the qvlab numerical laboratory.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

mod commands;
mod config;
mod error;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Context;
use error::CliError;

const DEFAULT_OUT: &str = "qvlab-out";
const THREADS_VAR: &str = "QVLAB_THREADS";

#[derive(Parser)]
#[command(name = "qvlab", version, about = "Evolve, diagnose and trace probability-current scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (strict JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled initial conditions.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AlgebraArgs {
    /// Accepted for uniformity; the identity suite needs no scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write `algebra_check.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the identity names without running them.
    #[arg(long)]
    list: bool,
    /// Corrupt one Dirac matrix entry to show the suite can fail.
    #[cfg(feature = "fault-injection")]
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the initial state and write `.qfs` snapshots.
    Evolve(Common),
    /// Residual reports for a snapshot series.
    Diagnose(Common),
    /// Trajectories of seeded samples through a snapshot series.
    Trace(Common),
    /// Vortex potentials and the induced fields of a snapshot series.
    Fields(Common),
    /// Taylor evolution matrix of a finite-order motion.
    Gps(Common),
    /// Run the algebraic identity suite.
    AlgebraCheck(AlgebraArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn context(args: Common) -> Result<Context, CliError> {
    let loaded = config::load(&args.config)?;
    let out = args
        .out
        .or_else(|| loaded.scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Context {
        loaded,
        out,
        seed: args.seed,
    })
}

fn dispatch(command: Command) -> Result<(), CliError> {
    configure_threads()?;
    match command {
        Command::Evolve(a) => commands::evolve::run(&context(a)?),
        Command::Diagnose(a) => commands::diagnose::run(&context(a)?),
        Command::Trace(a) => commands::trace::run(&context(a)?),
        Command::Fields(a) => commands::fields::run(&context(a)?),
        Command::Gps(a) => commands::gps::run(&context(a)?),
        Command::AlgebraCheck(a) => {
            let _ = (&a.config, a.seed);
            if a.list {
                commands::algebra::list();
                return Ok(());
            }
            #[cfg(feature = "fault-injection")]
            let fault = a.inject_fault.then_some(qvlab_core::algebra::Fault::GammaEntry);
            #[cfg(not(feature = "fault-injection"))]
            let fault = None;
            commands::algebra::run(a.out.as_deref(), fault)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qvlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
