use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::table::Format;

/// Scale functions, exit problems and overshoot/undershoot laws for
/// spectrally negative Lévy processes.
#[derive(Debug, Parser)]
#[command(name = "levy-scale", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// W, W' and Z on a grid of x.
    ScaleEval(ScaleEvalArgs),
    /// Discounted two-sided exit probabilities from [0, b].
    ExitProb(ExitProbArgs),
    /// Discounted overshoot density on a grid of a.
    Overshoot(DensityArgs),
    /// Discounted undershoot density on a grid of b.
    Undershoot(DensityArgs),
    /// Joint overshoot/undershoot window probability.
    Joint(JointArgs),
    /// Upper and lower bounds for the beta-family scale function.
    MeroBounds(MeroArgs),
    /// Bounds along the beta -> 0 path towards a CGMY process.
    CgmyLimit(CgmyArgs),
    /// Monte Carlo estimates of exit probabilities, histograms or windows.
    Simulate(SimulateArgs),
    /// Residuals of the analytic identities for a model.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Built-in name (exp1, weibull-fit, pareto-fit, beta-paper) or model file.
    #[arg(long)]
    pub model: String,
    /// Override the drift.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Override the jump intensity of a jump-diffusion model.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Discount rate; defaults to 0.05, or 0.03 for beta-family models.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Round numeric cells to this many decimals.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScaleEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub grid: Grid,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ExitProbArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Upper barrier.
    #[arg(long)]
    pub b: f64,
    /// Single starting point.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub x: Option<f64>,
    /// Grid of starting points.
    #[arg(long)]
    pub grid: Option<Grid>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Starting point.
    #[arg(long)]
    pub x: f64,
    /// Grid of overshoot (or undershoot) levels.
    #[arg(long)]
    pub grid: Grid,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct JointArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub x: Option<f64>,
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Overshoot window lo:hi (hi may be inf).
    #[arg(long, default_value = "0:inf")]
    pub a_window: Window,
    /// Undershoot window lo:hi (hi may be inf).
    #[arg(long, default_value = "0:inf")]
    pub b_window: Window,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    W,
    Z,
    WPrime,
}

#[derive(Debug, Args, Serialize)]
pub struct MeroArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Truncation order.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long)]
    pub grid: Grid,
    #[arg(long, value_enum, default_value_t = Quantity::W)]
    pub quantity: Quantity,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CgmyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long)]
    pub grid: Grid,
    /// Strictly decreasing beta values.
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1")]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub tilde_alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tilde_c: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Exit,
    Histogram,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingArg {
    Grid,
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpLawArg {
    /// The model's own jump distribution.
    Model,
    /// Weibull(0.6, 0.665) sizes, the law behind weibull-fit.
    Weibull,
    /// Pareto(1.2, 5) sizes, the law behind pareto-fit.
    Pareto,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SimKind::Exit)]
    pub kind: SimKind,
    /// Starting point (a grid of x is accepted for exit runs).
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub x: Option<f64>,
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Upper barrier for exit runs.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub n_paths: usize,
    #[arg(long, default_value_t = levy_scale::mc_oracle::DEFAULT_SUBSTEPS)]
    pub substeps: usize,
    #[arg(long, value_enum, default_value_t = CrossingArg::Grid)]
    pub crossing: CrossingArg,
    #[arg(long, value_enum, default_value_t = JumpLawArg::Model)]
    pub jump_law: JumpLawArg,
    /// Histogram bin width.
    #[arg(long, default_value_t = 0.1)]
    pub width: f64,
    /// Number of histogram bins; defaults to cover (0, x + 5).
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value = "0:inf")]
    pub a_window: Window,
    #[arg(long, default_value = "0:inf")]
    pub b_window: Window,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentitiesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Truncation order for beta-family models.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

pub trait HasModel {
    fn model_args(&self) -> &ModelArgs;
}

macro_rules! has_model {
    ($($t:ty),*) => {
        $(impl HasModel for $t {
            fn model_args(&self) -> &ModelArgs {
                &self.model
            }
        })*
    };
}

has_model!(ScaleEvalArgs, ExitProbArgs, DensityArgs, JointArgs, MeroArgs, CgmyArgs, SimulateArgs, IdentitiesArgs);

impl Command {
    pub fn model(&self) -> &ModelArgs {
        match self {
            Command::ScaleEval(a) => a.model_args(),
            Command::ExitProb(a) => a.model_args(),
            Command::Overshoot(a) | Command::Undershoot(a) => a.model_args(),
            Command::Joint(a) => a.model_args(),
            Command::MeroBounds(a) => a.model_args(),
            Command::CgmyLimit(a) => a.model_args(),
            Command::Simulate(a) => a.model_args(),
            Command::Identities(a) => a.model_args(),
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::ScaleEval(a) => &a.out,
            Command::ExitProb(a) => &a.out,
            Command::Overshoot(a) | Command::Undershoot(a) => &a.out,
            Command::Joint(a) => &a.out,
            Command::MeroBounds(a) => &a.out,
            Command::CgmyLimit(a) => &a.out,
            Command::Simulate(a) => &a.out,
            Command::Identities(a) => &a.out,
        }
    }
}

/// `start:stop:count`, evenly spaced and inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count.trim().parse().map_err(|e| format!("count '{count}': {e}"))?;
        if !start.is_finite() || !stop.is_finite() || start > stop {
            return Err(format!("need finite start <= stop, got {start} and {stop}"));
        }
        if count < 2 {
            return Err(format!("count must be at least 2, got {count}"));
        }
        Ok(Grid { start, stop, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `lo:hi` with `0 <= lo < hi <= inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some((lo, hi)) = s.split_once(':') else {
            return Err(format!("expected lo:hi, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        if !(lo >= 0.0 && lo < hi) || lo.is_infinite() {
            return Err(format!("need 0 <= lo < hi, got {lo}:{hi}"));
        }
        Ok(Window { lo, hi })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:4:401".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 401);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[400], 4.0);
        assert!((pts[100] - 1.0).abs() < 1e-15);
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1:1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert_eq!("0.5:0.5:2".parse::<Grid>().unwrap().points(), vec![0.5, 0.5]);
    }

    #[test]
    fn window_parsing() {
        let w: Window = "1:inf".parse().unwrap();
        assert_eq!((w.lo, w.hi), (1.0, f64::INFINITY));
        assert_eq!(w.to_string(), "1:inf");
        assert!("2:1".parse::<Window>().is_err());
        assert!("-1:1".parse::<Window>().is_err());
    }
}
