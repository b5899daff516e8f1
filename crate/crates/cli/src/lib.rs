//! Command-line front end for the central-spin model: resolves a flat TOML
//! config plus flag overrides, runs one experiment (or a sweep of them) and
//! writes CSV tables with a JSON manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, CommandKind};
pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "bellcat", version, about = "Central-spin Bell-cat state simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Eigenvalues over a grid of v.
    Spectrum,
    /// Zero-mode profiles and Fock-energy maps.
    Boundstates,
    /// Adiabatic generation protocol with Wigner snapshots.
    Drive,
    /// Driven evolution under central-spin dephasing.
    Lindblad,
    /// Single bosonic mode bound state and truncation artifact.
    Bosonic,
    /// Cross-product parameter sweep of another command.
    Sweep,
}

impl Cli {
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(self.overrides.apply(base))
    }
}

/// Runs the parsed command line and returns a one-line report.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = cli.resolve_config()?;
    let kind = match cli.command {
        Command::Spectrum => CommandKind::Spectrum,
        Command::Boundstates => CommandKind::Boundstates,
        Command::Drive => CommandKind::Drive,
        Command::Lindblad => CommandKind::Lindblad,
        Command::Bosonic => CommandKind::Bosonic,
        Command::Sweep => {
            let n = sweep::cmd_sweep(&cfg)?;
            return Ok(format!("{n} sweep points written to {}", cfg.out_dir.display()));
        }
    };
    let manifest = execute(kind, &cfg)?;
    Ok(format!(
        "{kind}: {} files written to {} in {:.2} s",
        manifest.files.len(),
        cfg.out_dir.display(),
        manifest.wall_clock_seconds
    ))
}
