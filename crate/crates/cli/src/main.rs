//! Command-line harness for the self-cooling toolkit: detuning sweeps,
//! seeded simulation campaigns, beam-mode analysis, and the check report.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 i/o.

mod commands;
mod error;
mod manifest;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use commands::modes_cmd::{ModesArgs, ModesWhat};
use commands::simulate::SimulateArgs;
use commands::sweep::SweepArgs;
use error::CliError;
use optomech::config::RunConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Detuned-cavity micro-mirror self-cooling: model, simulation, analysis"
)]
struct Cli {
    /// Configuration file (key = value); omit to use the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master seed for anything stochastic
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Write SVG plots next to the CSV outputs (--svg false to disable)
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    svg: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective damping / cooling across a detuning grid
    Sweep {
        /// Lower edge of the detuning grid, in units of kappa
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        delta_min: f64,
        /// Upper edge of the detuning grid, in units of kappa
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        delta_max: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 61)]
        points: usize,
        /// Input power in W; repeat for several curves (default: the config power)
        #[arg(long = "power-w")]
        power_w: Vec<f64>,
    },
    /// Seeded thermal-noise ensemble at one detuning
    Simulate {
        /// Operating detuning in units of kappa
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        delta: f64,
        /// Ensemble size
        #[arg(long, default_value_t = 30)]
        runs: usize,
        /// Simulated time per run, seconds
        #[arg(long, default_value_t = 0.1)]
        duration_s: f64,
        /// Integration steps per mechanical period
        #[arg(long, default_value_t = 64)]
        samples_per_period: usize,
        /// Keep every n-th sample in the stored traces
        #[arg(long, default_value_t = 8)]
        store_decimation: usize,
    },
    /// Beam-mechanics pipelines
    Modes {
        /// Which analysis to run
        #[arg(value_enum)]
        what: What,
        /// Multiplicative noise level for synthetic tomography
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
    },
    /// Run the full check suite and emit a pass/fail table
    Report {
        /// Reduced ensemble sizes for smoke testing
        #[arg(long, default_value_t = false)]
        quick: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Shape,
    Tomography,
    Mass,
    Tau,
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(RunConfig::from_path(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.config)?;
    match &cli.command {
        Command::Sweep {
            delta_min,
            delta_max,
            points,
            power_w,
        } => {
            let args = SweepArgs {
                delta_min: *delta_min,
                delta_max: *delta_max,
                points: *points,
                powers_w: power_w.clone(),
                seed: cli.seed,
                svg: cli.svg,
            };
            commands::sweep::run(&cfg, &args, &cli.out)
        }
        Command::Simulate {
            delta,
            runs,
            duration_s,
            samples_per_period,
            store_decimation,
        } => {
            if *samples_per_period < 50 {
                return Err(CliError::Validation(
                    "need at least 50 samples per period".into(),
                ));
            }
            let args = SimulateArgs {
                delta_over_kappa: *delta,
                runs: *runs,
                duration_s: *duration_s,
                samples_per_period: *samples_per_period,
                store_decimation: *store_decimation,
                seed: cli.seed,
                svg: cli.svg,
            };
            commands::simulate::run(&cfg, &args, &cli.out)
        }
        Command::Modes { what, noise } => {
            let args = ModesArgs {
                what: match what {
                    What::Shape => ModesWhat::Shape,
                    What::Tomography => ModesWhat::Tomography,
                    What::Mass => ModesWhat::Mass,
                    What::Tau => ModesWhat::Tau,
                },
                seed: cli.seed,
                noise: *noise,
                svg: cli.svg,
            };
            commands::modes_cmd::run(&cfg, &args, &cli.out)
        }
        Command::Report { quick } => commands::report::run(&cfg, *quick, cli.seed, &cli.out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
