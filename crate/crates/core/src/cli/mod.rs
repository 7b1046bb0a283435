//! Command-line front end of the `mcsma` binary.
//!
//! Configuration is assembled from an optional preset, an optional TOML
//! file and `--override KEY=VALUE` pairs, in that order. Exit codes: 0 on
//! success, 1 on runtime failure or a failed check, 2 on invalid input.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    analyze, analyze_rows, sense_curves, simulate, sweep_command, AnalyzeRow, Outcome,
};
pub use config::{
    apply_override, deep_merge, load, preset, AnalyzeSection, FileConfig, SenseCurvesSection,
    PRESETS,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        match e {
            Config(_) | Shape(_) | Domain(_) | Tractability { .. } => {
                CliError::Validation(e.to_string())
            }
            ModelViolation(_) | Oracle(_) => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mcsma",
    version,
    about = "Multichannel CSMA spectrum-sharing simulator and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override a config value, e.g. `seed=7` or `traffic.mean_arrival_interval=20`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Start from a preset (fig6a..fig6c, fig7a..fig7c).
    #[arg(long)]
    pub preset: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write simulate.csv.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Write replication 0's state changes to this file.
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
    /// Run the [sweep] section and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the throughput theorems and write analyze.csv.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimate detector curves and write sense_curves.csv.
    SenseCurves {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate { common, .. }
            | Command::Sweep { common }
            | Command::Analyze { common }
            | Command::SenseCurves { common } => common,
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<FileConfig, CliError> {
    let text =
        match &common.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", path.display()))
            })?),
            None => None,
        };
    let path = common
        .config
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    load(
        common.preset.as_deref(),
        text.as_deref().map(|t| (path.as_str(), t)),
        &common.overrides,
    )
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let common = cli.command.common().clone();
    let cfg = load_config(&common)?;
    std::fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", common.out.display())))?;
    let work = || match &cli.command {
        Command::Simulate { event_log, .. } => simulate(&cfg, &common.out, event_log.as_deref()),
        Command::Sweep { .. } => sweep_command(&cfg, &common.out),
        Command::Analyze { .. } => analyze(&cfg, &common.out),
        Command::SenseCurves { .. } => sense_curves(&cfg, &common.out),
    };
    match common.jobs {
        Some(0) => Err(CliError::Validation("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
