//! `measthermo` experiment runner: evaluates a configuration over a sweep
//! grid and writes one CSV table per run.

mod commands;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::LevelFilter;
use measthermo::config::ConfigFile;

use crate::commands::Context;
use crate::sweep::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    EfficiencyCurve,
    WorkFiniteTime,
    EntropyDecomposition,
    BoundFuzz,
    MpeClassify,
    RotatedProtocol,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EfficiencyCurve => "efficiency-curve",
            Command::WorkFiniteTime => "work-finite-time",
            Command::EntropyDecomposition => "entropy-decomposition",
            Command::BoundFuzz => "bound-fuzz",
            Command::MpeClassify => "mpe-classify",
            Command::RotatedProtocol => "rotated-protocol",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] measthermo::Error),
    #[error("at {key} = {value}: {source}")]
    Point { key: String, value: f64, source: measthermo::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Output(String),
}

#[derive(Debug, Parser)]
#[command(name = "measthermo", version, about = "Energetic cost of quantum measurements: CSV experiment tables")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Key-value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Grid over one model key: `key=start:stop:points[:log]`.
    #[arg(long)]
    sweep: Option<Sweep>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed for fuzz commands; overrides `fuzz.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Log informational messages to stderr.
    #[arg(short, long)]
    verbose: bool,
}

fn run(args: &Args) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.display().to_string(), source })?;
    let config = ConfigFile::parse(&text)?;
    let seed = match args.command {
        Command::BoundFuzz => args.seed.or_else(|| config.get("fuzz.seed").map(|s| s as u64)),
        _ => {
            if args.seed.is_some() {
                log::warn!("--seed is ignored by {}", args.command.name());
            }
            None
        }
    };
    let sweep_text = args.sweep.as_ref().map(Sweep::to_string);
    let hash = output::config_hash(args.command.name(), config.entries(), sweep_text.as_deref(), seed);
    let ctx = Context { config, sweep: args.sweep.clone(), seed };
    let out = commands::run(args.command, &ctx)?;
    out.table.write(&args.out, &hash)?;
    Ok(out.failures)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { LevelFilter::Info } else { LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(&args) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("measthermo: consistency failure: {f}");
            }
            eprintln!("measthermo: {} of the rows failed; table written to {}", failures.len(), args.out.display());
            ExitCode::from(3)
        }
        Err(e) => {
            let code = match e {
                CliError::Usage(_) | CliError::Model(measthermo::Error::Config { .. }) => 2,
                _ => 1,
            };
            eprintln!("measthermo: error: {e}");
            ExitCode::from(code)
        }
    }
}
