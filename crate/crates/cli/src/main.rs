//! `ptlight`: run scenarios, parameter sweeps and steady-state reports from
//! TOML scenario files.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptlight_core::quantifiers::LogBase;
use ptlight_core::scenario::{report_spectrum, report_steady, simulate, ScenarioConfig};
use ptlight_core::spectrum::ep_kappa;
use ptlight_core::sweep::sweep;
use ptlight_core::table::{format_f64, Table};
use ptlight_core::ScenarioError;
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "ptlight", version, about = "Two-mode PT-symmetric quantum optics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time series of amplitudes, moments and quantifiers
    Simulate(Common),
    /// Evaluate the [sweep] grid of a scenario file
    Sweep(Common),
    /// Steady states and their stability
    Steady(Common),
    /// Linear eigenfrequencies and PT classification
    Spectrum(Common),
    /// Down-conversion rate placing the system at its exceptional point
    EpKappa(EpKappaArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker thread cap for sweeps
    #[arg(long)]
    threads: Option<usize>,
    /// Drop the Langevin noise terms
    #[arg(long)]
    no_noise: bool,
    /// Logarithm base of the negativity: 2, 10 or e
    #[arg(long, value_parser = parse_log_base)]
    log_base: Option<LogBase>,
}

#[derive(Args, Debug)]
struct EpKappaArgs {
    /// Scenario file supplying epsilon and gamma1 when the flags are absent
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_log_base(s: &str) -> Result<LogBase, String> {
    s.parse()
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    Ok(ScenarioConfig::from_toml(&text)?)
}

fn load_with_overrides(args: &Common) -> Result<ScenarioConfig, CliError> {
    let mut config = load(&args.config)?;
    if args.no_noise {
        config.run.noise = false;
    }
    if let Some(base) = args.log_base {
        config.run.log_base = base;
    }
    Ok(config)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(table: &Table, format: Format, config: &ScenarioConfig) -> String {
    let echo = config.to_toml();
    match format {
        Format::Csv => table.to_csv(&echo),
        Format::Json => table.to_json(&echo),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let config = load_with_overrides(&args)?;
            let table = simulate(&config)?;
            emit(&args.out, &render(&table, args.format, &config))?;
            match table.failure {
                Some(f) => Err(CliError::Numerical(f)),
                None => Ok(()),
            }
        }
        Command::Sweep(args) => {
            let config = load_with_overrides(&args)?;
            let table = sweep(&config, args.threads)?;
            emit(&args.out, &render(&table, args.format, &config))
        }
        Command::Steady(args) => {
            let config = load_with_overrides(&args)?;
            let report = report_steady(&config.params.resolve()?)?;
            let text = match args.format {
                Format::Json => json(&report),
                Format::Csv => report.to_table().to_csv(&config.to_toml()),
            };
            emit(&args.out, &text)
        }
        Command::Spectrum(args) => {
            let config = load_with_overrides(&args)?;
            let report = report_spectrum(&config.params.resolve()?)?;
            let text = match args.format {
                Format::Json => json(&report),
                Format::Csv => report.to_table().to_csv(&config.to_toml()),
            };
            emit(&args.out, &text)
        }
        Command::EpKappa(args) => {
            let from_file = match &args.config {
                Some(path) => Some(load(path)?.params.resolve()?),
                None => None,
            };
            let epsilon = args.epsilon.or(from_file.map(|p| p.epsilon)).unwrap_or(1.0);
            let gamma = args
                .gamma
                .or(from_file.map(|p| p.gamma1))
                .ok_or_else(|| CliError::Config("ep-kappa needs --gamma or --config".into()))?;
            let kappa = ep_kappa(epsilon, gamma).map_err(|e| CliError::Config(e.to_string()))?;
            let text = match args.format {
                Format::Csv => format!(
                    "epsilon,gamma,kappa\n{},{},{}\n",
                    format_f64(epsilon),
                    format_f64(gamma),
                    format_f64(kappa)
                ),
                Format::Json => json(&serde_json::json!({ "epsilon": epsilon, "gamma": gamma, "kappa": kappa })),
            };
            emit(&args.out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptlight: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
