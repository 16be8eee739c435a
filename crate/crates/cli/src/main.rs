//! Command line front end: validates a TOML run configuration, executes one
//! pipeline stage and writes figure-ready CSV/JSON plus a manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 1 unexpected i/o failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Context;
use config::RunConfig;
use output::CmdError;

#[derive(Parser)]
#[command(
    name = "bipolaron",
    version,
    about = "Tweezer-dressed ion chain simulator: normal modes, couplings and bipolaron dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sampler seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensemble averaging (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium positions and axial/transverse mode tables.
    Modes(RunArgs),
    /// Two-spin ground-state energy matrix and calibration weights.
    Bmatrix(RunArgs),
    /// Hopping matrix, Lamb-Dicke parameters and power-law range.
    Jmatrix(RunArgs),
    /// Sector spectrum with tweezers on and off.
    Spectrum(RunArgs),
    /// Pair trajectories at the configured temperatures.
    Evolve(RunArgs),
    /// Temperature sweep of spread and mobility estimators.
    Sweep(RunArgs),
    /// Ground-state mobility product vs the closed form across chain sizes.
    Mobility(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Modes(a)
            | Command::Bmatrix(a)
            | Command::Jmatrix(a)
            | Command::Spectrum(a)
            | Command::Evolve(a)
            | Command::Sweep(a)
            | Command::Mobility(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Modes(_) => "modes",
            Command::Bmatrix(_) => "bmatrix",
            Command::Jmatrix(_) => "jmatrix",
            Command::Spectrum(_) => "spectrum",
            Command::Evolve(_) => "evolve",
            Command::Sweep(_) => "sweep",
            Command::Mobility(_) => "mobility",
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let args = cli.command.args();
    let config = RunConfig::load(&args.config).map_err(|e| CmdError::Config(e.0))?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CmdError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CmdError::Io(format!("thread pool: {e}")))?;
    }
    let ctx = Context {
        seed: args.seed.unwrap_or(config.thermal.sampler_seed),
        out_dir: args
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output.directory)),
        threads: args.threads,
        config,
    };
    match cli.command {
        Command::Modes(_) => commands::cmd_modes(&ctx),
        Command::Bmatrix(_) => commands::cmd_bmatrix(&ctx),
        Command::Jmatrix(_) => commands::cmd_jmatrix(&ctx),
        Command::Spectrum(_) => commands::cmd_spectrum(&ctx),
        Command::Evolve(_) => commands::cmd_evolve(&ctx),
        Command::Sweep(_) => commands::cmd_sweep(&ctx),
        Command::Mobility(_) => commands::cmd_mobility(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bipolaron {name}: {e}");
            match e {
                CmdError::Config(_) => ExitCode::from(2),
                CmdError::Numerical(_) => ExitCode::from(3),
                CmdError::Io(_) => ExitCode::from(1),
            }
        }
    }
}
