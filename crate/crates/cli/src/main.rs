//! `memwalk`: scriptable front end for the memory-driven random walk.
//!
//! Every subcommand writes CSV or JSON and a provenance record (version,
//! subcommand, resolved parameters, seed). Provenance carries no timestamps,
//! so identical invocations produce identical bytes.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use commands::{
    AutocorrArgs, BaselineArgs, ConvergenceArgs, FitArgs, MomentsArgs, PdfArgs, SampleArgs,
    SynthArgs,
};

#[derive(Debug, Parser)]
#[command(
    name = "memwalk",
    version,
    about = "Memory-driven binary random walk toolkit"
)]
struct Cli {
    /// Defaults file of `key = value` lines; `subcmd.key` scopes a key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact lattice distribution after N steps.
    Pdf(PdfArgs),
    /// Moments from the lattice and from the closed forms.
    Moments(MomentsArgs),
    /// Increment autocorrelation, closed form and Monte Carlo.
    Autocorr(AutocorrArgs),
    /// Monte Carlo trajectories.
    Sample(SampleArgs),
    /// Variance/N and kurtosis over a list of N.
    Convergence(ConvergenceArgs),
    /// Fit the regime-switching model to a return histogram.
    Fit(FitArgs),
    /// Gaussian and symmetric alpha-stable baselines.
    Baseline(BaselineArgs),
    /// Draw synthetic returns from the regime-switching model.
    Synth(SynthArgs),
}

/// Process exit codes.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const VALIDITY: u8 = 3;
    pub const IO: u8 = 4;
    pub const OPTIMIZER: u8 = 5;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: exit::USAGE,
            message: message.into(),
        }
    }

    pub fn io(err: impl std::fmt::Display) -> Self {
        Failure {
            code: exit::IO,
            message: err.to_string(),
        }
    }
}

impl From<memwalk::Error> for Failure {
    fn from(err: memwalk::Error) -> Self {
        use memwalk::Error as E;
        let code = match &err {
            E::CouplingOutOfRange { .. } => exit::VALIDITY,
            E::Io(_)
            | E::Csv(_)
            | E::Parse { .. }
            | E::NonPositivePrice { .. }
            | E::DuplicateDate { .. }
            | E::EmptyFile(_) => exit::IO,
            E::NonConvergentNormalization { .. }
            | E::InsufficientBins { .. }
            | E::OptimizerStalled { .. }
            | E::QuadratureFailure { .. } => exit::OPTIMIZER,
            _ => exit::USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn run(raw: Vec<String>) -> Result<(), Failure> {
    // A first lenient pass only to locate --config.
    let config_path = raw
        .iter()
        .position(|a| a == "--config")
        .and_then(|i| raw.get(i + 1).cloned())
        .or_else(|| {
            raw.iter()
                .find_map(|a| a.strip_prefix("--config=").map(str::to_string))
        });
    let args = match config_path {
        Some(path) => {
            let cfg = config::load(path.as_ref()).map_err(Failure::io)?;
            config::apply(&raw, &Cli::command(), &cfg).map_err(Failure::usage)?
        }
        None => raw,
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return Err(Failure {
                code,
                message: String::new(),
            });
        }
    };
    match cli.command {
        Command::Pdf(a) => commands::pdf(&a),
        Command::Moments(a) => commands::moments(&a),
        Command::Autocorr(a) => commands::autocorr(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Convergence(a) => commands::convergence(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("memwalk: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
