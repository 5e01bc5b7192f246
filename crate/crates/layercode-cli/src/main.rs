//! Experiment runner for the layered coded-computation pipeline.
//!
//! Subcommands map to the experiment drivers in the `layercode` library:
//! `simulate` (per-job delay realizations), `sweep-omega` (mean delay and
//! bounds versus redundancy), `sweep-deadline` (success rate versus
//! deadline), `bounds` (the closed-form table), and `verify-codec` (the
//! codec property suite on random instances).
//!
//! Configuration comes from, in increasing precedence: built-in defaults
//! (the five-worker reference system), a flat `key = value` config file,
//! and command-line flags. The seed falls back to `LAYERCODE_SEED` when
//! neither flag nor file provides one.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

mod settings;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use layercode::experiments;
use settings::{CliError, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "layercode",
    version,
    about = "Layered-resolution coded matrix multiplication experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value config file; flags override file values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for every stochastic stream (fallback: LAYERCODE_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of job arrivals to simulate.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Redundancy ratio.
    #[arg(long, global = true)]
    omega: Option<f64>,

    /// Chunks per element (1 disables layering).
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Computation-time budget per job.
    #[arg(long, global = true)]
    deadline: Option<f64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[arg(long, global = true, value_enum)]
    intra_layer: Option<IntraLayerArg>,

    /// Carry real coded matrices through the pipeline and verify them.
    #[arg(long, global = true)]
    with_payload: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and emit per-job delay realizations.
    Simulate,
    /// Mean per-layer delay and analytic bounds across a redundancy grid.
    SweepOmega {
        /// Comma-separated redundancy ratios (default from config).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Per-layer success rates across a deadline grid.
    SweepDeadline {
        /// Comma-separated deadlines (default from config).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// The closed-form service-time and delay bound table.
    Bounds {
        /// Estimate queueing moments from this many simulated jobs.
        #[arg(long, default_value_t = 0)]
        calibration_jobs: usize,
        /// Analytic squared coefficient of variation for the service time.
        #[arg(long)]
        cs2: Option<f64>,
    },
    /// Run the codec property suite on random instances.
    VerifyCodec {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntraLayerArg {
    Concurrent,
    Serial,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli)?;
    let format = settings.format;
    let (body, failed) = match &cli.command {
        Command::Simulate => {
            let report = experiments::run_simulate(&settings.sim)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            (render(format, report.to_csv(), || report.to_json()), false)
        }
        Command::SweepOmega { grid } => {
            let grid = grid.clone().unwrap_or_else(|| settings.omega_grid.clone());
            let sweep = experiments::sweep_omega(&settings.sim, &grid)
                .map_err(map_experiment_error)?;
            (render(format, sweep.to_csv(), || sweep.to_json()), false)
        }
        Command::SweepDeadline { grid } => {
            let grid = grid
                .clone()
                .unwrap_or_else(|| settings.deadline_grid.clone());
            let sweep = experiments::sweep_deadline(&settings.sim, &grid)
                .map_err(map_experiment_error)?;
            (render(format, sweep.to_csv(), || sweep.to_json()), false)
        }
        Command::Bounds {
            calibration_jobs,
            cs2,
        } => {
            let table = experiments::bounds_table(&settings.sim, *calibration_jobs, *cs2)
                .map_err(map_experiment_error)?;
            (render(format, table.to_csv(), || table.to_json()), false)
        }
        Command::VerifyCodec { trials } => {
            let verification = experiments::verify_codec(settings.sim.rng_seed, *trials);
            let failed = !verification.passed();
            (
                render(format, verification.to_csv(), || verification.to_json()),
                failed,
            )
        }
    };

    match &settings.out {
        Some(path) => fs::write(path, &body)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Runtime(format!("cannot write stdout: {e}")))?;
        }
    }
    if failed {
        return Err(CliError::Runtime("codec verification failed".into()));
    }
    Ok(())
}

fn render(format: Format, csv: String, json: impl FnOnce() -> String) -> String {
    match format {
        Format::Csv => csv,
        Format::Json => {
            let mut body = json();
            body.push('\n');
            body
        }
    }
}

fn map_experiment_error(e: experiments::ExperimentError) -> CliError {
    match e {
        experiments::ExperimentError::EmptyGrid => CliError::Config(e.to_string()),
        experiments::ExperimentError::Sim(layercode::sim::SimError::InvalidConfig(msg)) => {
            CliError::Config(msg)
        }
        other => CliError::Runtime(other.to_string()),
    }
}
