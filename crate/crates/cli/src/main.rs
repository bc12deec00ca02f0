mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::Format;

#[derive(Parser)]
#[command(
    name = "sfp",
    version,
    about = "Simulate measurement-and-reversal state control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by every subcommand that loads a config.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Dotted `key=value` assignment, e.g. `measurement.p0=0.4` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent runs
    #[arg(long)]
    pub runs: Option<usize>,
    /// Number of measurement cycles per run
    #[arg(long)]
    pub cycles: Option<usize>,
}

impl Overrides {
    pub fn assignments(&self) -> Vec<String> {
        let mut out = self.set.clone();
        if let Some(s) = self.seed {
            out.push(format!("master_seed={s}"));
        }
        if let Some(r) = self.runs {
            out.push(format!("runs={r}"));
        }
        if let Some(c) = self.cycles {
            out.push(format!("cycles={c}"));
        }
        out
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write result tables
    Run {
        /// Config file; reads stdin when absent or `-`
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print a built-in config
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Report whether the target is reachable with the configured measurement
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Post-process the tables of a previous run
    Analyze {
        #[arg(long, value_enum)]
        kind: AnalysisKind,
        /// Directory written by `sfp run`
        #[arg(long)]
        input: PathBuf,
        /// Where to write the analysis table; defaults to the input directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spectrum estimator (single_run, mean_trace, averaged_power)
        #[arg(long)]
        estimator: Option<String>,
        /// Fraction of cycles discarded before averaging
        #[arg(long)]
        burn_in: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AnalysisKind {
    Spectrum,
    Asymptotic,
    Bloch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            format,
            overrides,
        } => commands::run(config.as_deref(), &out, format, &overrides),
        Command::Preset { name, overrides } => commands::preset(&name, &overrides),
        Command::Check { config, overrides } => commands::check(config.as_deref(), &overrides),
        Command::Analyze {
            kind,
            input,
            out,
            estimator,
            burn_in,
            format,
        } => commands::analyze(
            kind,
            &input,
            out.as_deref().unwrap_or(&input),
            estimator.as_deref(),
            burn_in,
            format,
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sfp: {e}");
            e.exit_code()
        }
    }
}
