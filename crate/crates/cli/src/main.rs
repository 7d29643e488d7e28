mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfric_sweep::Format;

use config::{parse_hbar_preset, Overrides, RunConfig, OUT_DIR_ENV};
use error::CliError;

/// Dissipative kicked rotator: classical and quantum evolution, their
/// comparison, parameter sweeps and numerical self-checks.
#[derive(Debug, Parser)]
#[command(name = "qfric", version)]
struct Cli {
    /// JSON run configuration; omitted fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep worker threads; also sizes the compute thread pool.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (default: $QFRIC_OUT_DIR, then ./qfric-out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Sweep output formats, comma separated: csv, json, pgm.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// hbar_eff preset: 0.412, 0.137, 0.046 (or index 0, 1, 2).
    #[arg(long, global = true, value_parser = parse_hbar_preset)]
    hbar_preset: Option<f64>,
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the classical ensemble and write its momentum marginal.
    Classical,
    /// Evolve the density matrix and write its momentum marginal.
    Quantum,
    /// Run both pipelines on a shared grid and report the measures.
    Compare,
    /// Run or resume a (k, gamma, hbar_eff) sweep.
    Sweep {
        /// Re-emit outputs from a previous sweep.json instead of computing.
        #[arg(long)]
        from_json: Option<PathBuf>,
        /// Stop after this many new cells; the rest stays pending.
        #[arg(long)]
        max_cells: Option<usize>,
    },
    /// Run the numerical self-checks.
    Verify {
        /// Build the channel with a wrong gamma-nu relation; the contraction
        /// check must then fail.
        #[arg(long, hide = true)]
        negative_control: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out_dir: cli.out_dir,
        formats: cli.format,
        hbar_preset: cli.hbar_preset,
        quiet: cli.quiet,
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let cfg = base.resolve(&overrides, env_dir)?;
    // A second initialization in the same process is harmless; ignore it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.sweep.workers).build_global();

    let files = match cli.command {
        Command::Classical => commands::cmd_classical(&cfg)?,
        Command::Quantum => commands::cmd_quantum(&cfg)?,
        Command::Compare => commands::cmd_compare(&cfg)?,
        Command::Sweep { from_json, max_cells } => commands::cmd_sweep(&cfg, from_json.as_deref(), max_cells)?,
        Command::Verify { negative_control } => commands::cmd_verify(&cfg, negative_control)?,
    };
    if !cfg.quiet() {
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
