//! `charpoly-ratios`: evaluate and verify averages of ratios of
//! characteristic polynomials from a declarative run configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Library(#[from] charpoly_ratios::Error),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Library(e) if e.is_constraint() => 4,
            CliError::Library(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "charpoly-ratios", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the oracle seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the verification tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Orthogonal polynomials, norms and orthogonality residuals.
    Ortho,
    /// Evaluate the configured query.
    Eval,
    /// Compare the formula against the brute-force oracle on a grid.
    Verify,
    /// Sweep one query variable along a segment.
    Scan,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let (Some(seed), Some(oracle)) = (cli.seed, cfg.oracle.as_mut()) {
        oracle.seed = seed;
    }
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tolerance must be positive, got {t}")));
        }
        cfg.verify.get_or_insert_with(Default::default).tolerance = t;
    }
    let (report, passed) = match cli.command {
        Command::Ortho => (commands::ortho(&cfg)?, true),
        Command::Eval => (commands::eval(&cfg)?, true),
        Command::Verify => {
            let v = commands::verify(&cfg)?;
            (v.report, v.all_passed)
        }
        Command::Scan => (commands::scan(&cfg)?, true),
    };
    let default_format = match cli.command {
        Command::Scan => Format::Csv,
        _ => Format::Json,
    };
    let format = cli.format.or(cfg.output.format).unwrap_or(default_format);
    let bytes = report.render(format)?;
    match cli.out.clone().or(cfg.output.path.as_ref().map(PathBuf::from)) {
        Some(p) => std::fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
