//! Command-line driver: Mie sweeps, squeezed-vacuum force runs and identity
//! certification, with TOML configs and CSV output.

pub mod commands;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod output;
pub mod units;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Loaded, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, Table};
use crate::units::BandwidthUnit;

#[derive(Debug, Parser)]
#[command(
    name = "qforce",
    version,
    about = "Mie optics and squeezed-vacuum radiation pressure on spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration, layered over the command's preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// CSV output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "QFORCE_THREADS")]
    pub threads: Option<usize>,

    /// How bandwidth numbers are read.
    #[arg(long, global = true, value_enum)]
    pub bandwidth_unit: Option<BandwidthUnit>,

    /// Multipole truncation: "auto" or "fixed:N".
    #[arg(long, global = true)]
    pub truncation: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Extinction, scattering, absorption and radiation-pressure cross-sections.
    CrossSections,
    /// Drive, recoil and total force under squeezed-vacuum illumination.
    Force,
    /// Check the scattering identities on a grid of size parameters and permittivities.
    Certify,
    /// Reference radius sweep of σ_pr and the squeezed-light force.
    Fig1,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CrossSections => "cross-sections",
            Command::Force => "force",
            Command::Certify => "certify",
            Command::Fig1 => "fig1",
        }
    }

    fn preset(self) -> &'static str {
        match self {
            Command::Certify => config::CERTIFY_PRESET,
            _ => config::FIG1_PRESET,
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qforce {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let flags = Overrides {
        out: cli.out.clone(),
        bandwidth_unit: cli.bandwidth_unit,
        truncation: cli.truncation.clone(),
    };
    let loaded = config::load(cli.config.as_deref(), Some(cli.command.preset()), &flags)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    pool.install(|| dispatch(cli.command, &loaded))
}

fn dispatch(command: Command, cfg: &Loaded) -> CliResult<()> {
    let (table, notes) = match command {
        Command::CrossSections => commands::cross_sections_table(cfg)?,
        Command::Force => commands::force_table(cfg)?,
        Command::Fig1 => commands::fig1_table(cfg)?,
        Command::Certify => {
            let report = commands::certify(cfg)?;
            print!("{}", report.render());
            if cfg.output_path().is_some() {
                emit(command, cfg, &report.table(), &[])?;
            }
            let failures = report.failures();
            return if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Certification(failures.join(", ")))
            };
        }
    };
    let table = match cfg.columns() {
        Some(cols) => table.select(cols)?,
        None => table,
    };
    emit(command, cfg, &table, &notes)
}

fn emit(command: Command, cfg: &Loaded, table: &Table, notes: &[String]) -> CliResult<()> {
    let mut provenance = vec![
        format!("qforce {} {}", env!("CARGO_PKG_VERSION"), command.name()),
        "config:".to_string(),
        cfg.echo(),
    ];
    provenance.extend_from_slice(notes);
    match cfg.output_path() {
        Some(path) => {
            let file = std::fs::File::create(&path)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
            write_csv(std::io::BufWriter::new(file), &provenance, table)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, &provenance, table)?;
            lock.flush()
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
        }
    }
}
