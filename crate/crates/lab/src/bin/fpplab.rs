use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpp_lab::commands::{run, CliError, Command};
use fpp_lab::config::{Config, ConfigError};

#[derive(Parser)]
#[command(name = "fpplab", version, about = "Maximal flows through random lattice cylinders")]
struct Cli {
    /// Worker threads for replications. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Mean of τ/H over replications for each scale.
    EstimateNu { config: PathBuf },
    /// Upper tail frequencies along a ladder of scales.
    TailScan { config: PathBuf },
    /// Fit the decay exponent of −log P and classify it.
    RegimeFit { config: PathBuf },
    /// Run the verification suite. The config file is optional.
    Verify { config: Option<PathBuf> },
    /// Write one sampled instance in DIMACS max-flow format.
    DumpInstance { config: PathBuf },
}

fn load(path: Option<&PathBuf>) -> Result<Config, CliError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid {
        key: "config".into(),
        reason: format!("{}: {e}", path.display()),
    })?;
    Ok(Config::parse(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, path) = match &cli.command {
        Sub::EstimateNu { config } => (Command::EstimateNu, Some(config)),
        Sub::TailScan { config } => (Command::TailScan, Some(config)),
        Sub::RegimeFit { config } => (Command::RegimeFit, Some(config)),
        Sub::Verify { config } => (Command::Verify, config.as_ref()),
        Sub::DumpInstance { config } => (Command::DumpInstance, Some(config)),
    };
    match load(path).and_then(|config| run(command, &config, cli.workers)) {
        Ok(report) => {
            for line in report.lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fpplab {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
