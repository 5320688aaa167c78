use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbm_cli::commands;
use qbm_cli::{CliError, Config};
use qbm_core::Convention;

#[derive(Parser)]
#[command(
    name = "qbm",
    version,
    about = "Two Brownian particles in a common ohmic bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Standard,
    Paper,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Standard => Convention::Standard,
            ConventionArg::Paper => Convention::HbarUnit,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium second moments.
    Moments(Common),
    /// Logarithmic negativity over an (r, A) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
        /// Also evaluate the general-covariance route with a finite regulator.
        #[arg(long)]
        regulator_check: bool,
    },
    /// Entanglement death temperature A* for each r.
    Death {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
    },
    /// Classical Langevin ensemble.
    Langevin {
        #[command(flatten)]
        common: Common,
        /// Overrides `langevin.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Density-matrix elements in position representation.
    Density(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Moments(c) | Command::Density(c) => c,
        Command::Sweep { common, .. }
        | Command::Death { common, .. }
        | Command::Langevin { common, .. } => common,
    };
    let config = Config::load(&common.config)?;
    let mut out: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match &cli.command {
        Command::Moments(_) => commands::cmd_moments(&config, &mut out)?,
        Command::Sweep {
            convention,
            regulator_check,
            ..
        } => commands::cmd_sweep(
            &config,
            convention.map(Into::into),
            *regulator_check,
            &mut out,
        )?,
        Command::Death { convention, .. } => {
            commands::cmd_death(&config, convention.map(Into::into), &mut out)?
        }
        Command::Langevin { seed, .. } => commands::cmd_langevin(&config, *seed, &mut out)?,
        Command::Density(_) => commands::cmd_density(&config, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qbm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
