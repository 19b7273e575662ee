use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "heston-fx", version, about = "Heston model pricing, diagnostics and smile calibration for FX vanillas")]
pub struct Cli {
    #[command(flatten)]
    pub params: ParamArgs,

    #[command(flatten)]
    pub io: IoArgs,

    #[command(subcommand)]
    pub command: Command,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

/// Model and market inputs. Flags override values from `--params`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct ParamArgs {
    /// JSON document with keys kappa, theta, sigma, rho, v0, lambda, spot, rd, rf.
    #[arg(long, global = true, value_parser = existing_file)]
    #[serde(skip)]
    pub params: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// Market price of volatility risk.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub spot: Option<f64>,
    /// Domestic rate, continuously compounded.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rd: Option<f64>,
    /// Foreign rate, continuously compounded.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rf: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct IoArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Call,
    Put,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Original,
    Transformed,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EulerAbsorbing,
    EulerReflecting,
    Qe,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Summary,
    Paths,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Kappa,
    Theta,
    Sigma,
    Rho,
    V0,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OptionArgs {
    /// Strikes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub strike: Vec<f64>,
    /// Maturities in years, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Kind::Call)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value_t = Formulation::Transformed)]
    pub formulation: Formulation,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Closed-form vanilla prices.
    Price(OptionArgs),
    /// Closed-form Greeks.
    Greeks(OptionArgs),
    /// Marginal density of centered log returns over a time lag.
    Density(DensityArgs),
    /// Carr-Madan FFT price ladder.
    Fft(FftArgs),
    /// Monte Carlo simulation.
    Simulate(SimulateArgs),
    /// Feller condition report.
    Feller,
    /// Forward vol-of-vol and correlation between two tenors.
    ForwardVol(ForwardVolArgs),
    /// Fit each tenor of a delta-quoted smile file.
    Calibrate(CalibrateArgs),
    /// Model smiles while one parameter is varied.
    SmileSweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 1.0)]
    pub time_lag: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = -0.5)]
    pub x_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub n_points: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FftArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 4096)]
    pub n_points: usize,
    /// Frequency step.
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    /// Damping exponent.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Only emit strikes at or above this level.
    #[arg(long)]
    pub strike_min: Option<f64>,
    /// Only emit strikes at or below this level.
    #[arg(long)]
    pub strike_max: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 100)]
    pub steps_per_year: usize,
    #[arg(long, value_enum, default_value_t = Scheme::Qe)]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_antithetic: bool,
    /// Draw v0 from the stationary gamma law.
    #[arg(long)]
    pub stationary_start: bool,
    /// `paths` emits full spot and variance trajectories.
    #[arg(long, value_enum, default_value_t = SimMode::Summary)]
    pub mode: SimMode,
    /// Price options at the horizon, comma separated strikes.
    #[arg(long, value_delimiter = ',')]
    pub strike: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Kind::Call)]
    pub kind: Kind,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ForwardVolArgs {
    #[arg(long)]
    pub t1: f64,
    #[arg(long)]
    pub t2: f64,
    #[arg(long)]
    pub sigma_t1: f64,
    #[arg(long)]
    pub sigma_t2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_t2: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CalibrateArgs {
    /// CSV with header tenor_years,delta,quote_vol.
    #[arg(long, value_parser = existing_file)]
    pub smile: PathBuf,
    /// Hold v0 fixed; defaults to the squared ATM vol.
    #[arg(long)]
    pub fixed_v0: Option<f64>,
    /// Hold kappa fixed; defaults to 1.5.
    #[arg(long)]
    pub fixed_kappa: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub max_evals: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Signed spot-delta pillars; strikes are fixed from the base parameters.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
          default_values_t = vec![-0.10, -0.25, 0.50, 0.25, 0.10])]
    pub deltas: Vec<f64>,
}
