//! The `diffgof` command line: simulate paths, fit null models, test the
//! diffusion specification of observed series, export confidence bands and
//! run Monte Carlo studies.

pub mod commands;
pub mod data;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diffusion_gof::gof::{Calibration, Method};
use diffusion_gof::smooth::Bandwidth;

pub use commands::{run, run_test, simulate_path};
pub use data::{load_csv, ColumnSpec, RateSeries, DAILY_DELTA};

#[derive(Debug, Parser)]
#[command(name = "diffgof", version, about = "Goodness-of-fit tests for diffusion models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write it as a `t,x` CSV.
    Simulate(SimulateArgs),
    /// Fit a parametric model to a series.
    Fit(FitArgs),
    /// Test the CKLS diffusion specification of a series.
    Test(TestArgs),
    /// Pointwise confidence band for the diffusion function.
    Bands(BandsArgs),
    /// Run a Monte Carlo configuration.
    Mc(McArgs),
}

/// Where the input series comes from.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Value column (default: the second column).
    #[arg(long)]
    pub column: Option<String>,
    /// Date or time column (default: the first column).
    #[arg(long)]
    pub date_column: Option<String>,
    /// Time step in years (default: 1/252 for dated rows, else the step of
    /// the time column).
    #[arg(long)]
    pub delta: Option<f64>,
}

impl InputArgs {
    pub fn spec(&self) -> ColumnSpec {
        ColumnSpec {
            index: self.date_column.clone(),
            value: self.column.clone(),
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimModel {
    /// `dX = κ(μ - X)dt + σ dW`, exact transitions.
    Ou,
    /// `dX = κ(μ - X)dt + σX^γ dW`, Milstein.
    Ckls,
    /// `dX = σX dW`, Milstein.
    Scale,
    /// CAR(p) with `--alpha`.
    Car,
    /// The two-regime CTAR(1) of the dimensionality study.
    Ctar,
    /// A Monte Carlo scenario (`--scenario m1 … s5`).
    Scenario,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: SimModel,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Time step (default 1/252; scenarios always use 1/n).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial value (default: μ, or 1 for the scale model).
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Diffusion coefficient σ; `--sigma2` sets σ² instead.
    #[arg(long, conflicts_with = "sigma2")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// CAR coefficients `α₁,…,α_p`.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub scenario: Option<String>,
    /// Jump intensity per unit time (CKLS only). Each jump multiplies the
    /// level by `exp(J)`, `J ~ N(0, jump-sd²)`.
    #[arg(long, default_value_t = 0.0)]
    pub jump_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jump_sd: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    /// A blank argument set for `model`, as clap would fill it.
    pub fn new(model: SimModel) -> Self {
        Self {
            model,
            n: 1000,
            delta: None,
            seed: 0,
            x0: None,
            mu: 0.0,
            kappa: 1.0,
            sigma: None,
            sigma2: None,
            gamma: 0.5,
            alpha: Vec::new(),
            scenario: None,
            jump_rate: 0.0,
            jump_sd: 0.0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Ou,
    Ckls,
    Scale,
    Car,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = FitModel::Ckls)]
    pub model: FitModel,
    /// CAR order.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// One JSON object instead of `name,value` lines.
    #[arg(long)]
    pub json: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: diffusion_gof::Error| e.to_string())
}

fn parse_calibration(s: &str) -> Result<Calibration, String> {
    s.parse().map_err(|e: diffusion_gof::Error| e.to_string())
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    Bandwidth::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Methods to run (comma-separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "er-ks,er-cvm,np,glrt,dcov")]
    pub method: Vec<Method>,
    #[arg(long = "B", default_value_t = 500)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// DCOV calibration; the other methods always use the bootstrap.
    #[arg(long, value_parser = parse_calibration, default_value = "bootstrap")]
    pub calibration: Calibration,
    /// `cv`, `rot`, `rot*c` or a fixed bandwidth.
    #[arg(long, value_parser = parse_bandwidth, default_value = "cv")]
    pub bandwidth: Bandwidth,
    /// One JSON object per line instead of CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_bandwidth, default_value = "cv")]
    pub bandwidth: Bandwidth,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Required; overrides any seed in the file.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
