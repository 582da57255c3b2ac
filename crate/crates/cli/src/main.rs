//! `lpcascade`: construct data, run analyses and evolve the truncated flows.
//!
//! Exit codes: 0 success, 2 configuration or validation failure, 3 runtime
//! numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliResult;
use config::KvConfig;

#[derive(Parser)]
#[command(name = "lpcascade", version, about = "Littlewood-Paley cascade experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override or add a key: `--set key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an initial datum; writes field.json, construction.json and, for nse, blocks.csv.
    Construct(Common),
    /// Run an analysis on a datum or field.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Integrate the truncated equations; writes diagnostics.csv.
    Evolve(Common),
    /// Concatenate CSV outputs with provenance headers into report.csv.
    Report {
        /// Output directories of earlier runs.
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Analysis {
    /// Transfer coefficients at the probe frequencies (transfer.csv).
    Transfer(Common),
    /// A/B/C split of the block trilinear terms (triads.csv).
    Triads(Common),
    /// Per-shell Besov weights (besov.csv).
    Besov(Common),
    /// Interaction buckets of the shell trilinear term (bony.csv).
    Bony(Common),
}

fn with_config(c: &Common, f: impl FnOnce(&KvConfig, &std::path::Path) -> CliResult<()>) -> CliResult<()> {
    let cfg = KvConfig::load(c.config.as_deref(), &c.set)?;
    f(&cfg, &c.out)
}

fn dispatch(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Construct(c) => with_config(&c, commands::construct),
        Cmd::Evolve(c) => with_config(&c, commands::evolve),
        Cmd::Analyze { what } => match what {
            Analysis::Transfer(c) => with_config(&c, commands::analyze_transfer),
            Analysis::Triads(c) => with_config(&c, commands::analyze_triads),
            Analysis::Besov(c) => with_config(&c, commands::analyze_besov),
            Analysis::Bony(c) => with_config(&c, commands::analyze_bony),
        },
        Cmd::Report { inputs, out } => commands::report(&inputs, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lpcascade: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
