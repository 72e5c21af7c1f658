use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadsurf::cli::{cmd_check_gains, cmd_compare, cmd_simulate, Overrides, RunConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "quadsurf", version, about = "Surface-based SE(3) quadrotor control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, write telemetry CSV and print a summary.
    Simulate {
        /// TOML run config.
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate gain conditions and region-of-attraction bounds.
    CheckGains {
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run two configs on the same grid and compare control effort.
    Compare {
        /// Proposed controller config.
        config_a: PathBuf,
        /// Benchmark controller config.
        config_b: PathBuf,
        /// Per-sample delta f_RMS CSV.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> quadsurf::Result<u8> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Simulate { config, overrides } => {
            cmd_simulate(&RunConfig::load(config.as_deref(), &overrides)?, &mut stdout)
        }
        Command::CheckGains { config, overrides } => {
            cmd_check_gains(&RunConfig::load(config.as_deref(), &overrides)?, &mut stdout)
        }
        Command::Compare { config_a, config_b, output } => {
            let none = Overrides::default();
            let a = RunConfig::load(Some(&config_a), &none)?;
            let b = RunConfig::load(Some(&config_b), &none)?;
            cmd_compare(&a, &b, output.as_deref(), &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
