//! `farmlayout` command-line interface.

mod commands;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use farmlayout::{DeficitBasis, FarmError, WakeModel, WakeModelConfig};

#[derive(Debug, Parser)]
#[command(name = "farmlayout", version, about = "Wind-farm wake modelling and layout optimization")]
pub struct Cli {
    /// Base seed for the optimizer (overrides the problem file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FARMLAYOUT_THREADS")]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "farmlayout-out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bin a wind time series into the 36-sector rose.
    Windrose(WindroseArgs),
    /// Installed capacity and turbine count for an area.
    Capacity(CapacityArgs),
    /// AEP and wake loss of a given layout.
    Evaluate(EvaluateArgs),
    /// Multi-start layout optimization.
    Optimize(OptimizeArgs),
    /// Waked wind-speed grid for one inflow.
    Flowfield(FlowfieldArgs),
    /// AEP of a layout under both wake models.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "synthetic"]))]
pub struct WindroseArgs {
    /// Time-series CSV (`timestamp,u100,v100` or `timestamp,speed,direction`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Emit the built-in NNW-dominant hub-height rose instead.
    #[arg(long)]
    pub synthetic: bool,
    /// Measurement height, m.
    #[arg(long, default_value_t = 100.0)]
    pub ref_height: f64,
    /// Hub height, m.
    #[arg(long, default_value_t = 150.0)]
    pub hub_height: f64,
    /// Power-law shear exponent.
    #[arg(long, default_value_t = 0.15)]
    pub alpha: f64,
    /// Use the energy-weighted (cubic) bin mean speed.
    #[arg(long)]
    pub cubic_mean: bool,
    /// Also write rose.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Project area, km².
    #[arg(long)]
    pub area: f64,
    /// Installed capacity density, MW/km².
    #[arg(long, default_value_t = 3.5)]
    pub density: f64,
    /// Unit rating, MW.
    #[arg(long, default_value_t = 15.0)]
    pub rating: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Jensen,
    Bastankhah,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Local,
    Freestream,
}

/// Wake-model overrides shared by the evaluation commands.
#[derive(Debug, Args)]
pub struct WakeArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Jensen wake expansion coefficient.
    #[arg(long)]
    pub k: Option<f64>,
    /// Gaussian wake growth rate.
    #[arg(long)]
    pub k_star: Option<f64>,
    #[arg(long, value_enum)]
    pub deficit_basis: Option<BasisArg>,
}

impl WakeArgs {
    pub fn apply(&self, mut cfg: WakeModelConfig) -> WakeModelConfig {
        if let Some(m) = self.model {
            cfg.model = match m {
                ModelArg::Jensen => WakeModel::Jensen,
                ModelArg::Bastankhah => WakeModel::Bastankhah,
            };
        }
        if let Some(k) = self.k {
            cfg.k_jensen = k;
        }
        if let Some(k) = self.k_star {
            cfg.k_star = k;
        }
        if let Some(b) = self.deficit_basis {
            cfg.deficit_basis = match b {
                BasisArg::Local => DeficitBasis::Local,
                BasisArg::Freestream => DeficitBasis::Freestream,
            };
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: PathBuf,
    /// Layout CSV (`x_m,y_m`).
    #[arg(long)]
    pub layout: PathBuf,
    #[command(flatten)]
    pub wake: WakeArgs,
    /// Also write layout.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub starts: Option<usize>,
    /// Gradient iterations per sequence.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Minimum spacing in rotor diameters.
    #[arg(long)]
    pub min_spacing_d: Option<f64>,
    /// Turbine count (default: from the problem file or capacity density).
    #[arg(long)]
    pub n_turbines: Option<usize>,
    #[command(flatten)]
    pub wake: WakeArgs,
    /// Also write layout.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Args)]
pub struct FlowfieldArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    /// Wind from-direction, degrees (default: the rose's dominant bin).
    #[arg(long)]
    pub direction: Option<f64>,
    /// Free-stream speed, m/s (default: mean speed of the chosen bin).
    #[arg(long)]
    pub speed: Option<f64>,
    /// Grid spacing, m.
    #[arg(long, default_value_t = 100.0)]
    pub cell_size: f64,
    /// Extra margin around the boundary, m.
    #[arg(long, default_value_t = 2000.0)]
    pub margin: f64,
    #[command(flatten)]
    pub wake: WakeArgs,
    /// Also write flowfield.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
}

const EXIT_INPUT: u8 = 2;
const EXIT_OPTIMIZATION: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<FarmError>()) {
        Some(FarmError::OptimizationFailure(_)) => EXIT_OPTIMIZATION,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
