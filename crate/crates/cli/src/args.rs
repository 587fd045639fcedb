use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "sphreg",
    version,
    about = "Rotation-invariant sparse regularization of spherical fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Regularize a field at one lambda and summarize the result.
    Regularize(RegularizeArgs),
    /// Export the regularization path and the l0 staircase.
    Frontier(FrontierArgs),
    /// Turn a discrepancy, norm or error budget into lambda.
    SolveLambda(SolveArgs),
    /// Rescale a regularized field and export the discrepancy curve q(gamma).
    Scale(RegularizeArgs),
    /// Draw isotropic Gaussian fields from a power spectrum.
    Simulate(SimulateArgs),
    /// Monte-Carlo check that regularization keeps an ensemble isotropic.
    IsotropyTest(IsotropyArgs),
    /// Regularize, trace the frontier and rescale in one run, with field
    /// errors on the quadrature grid.
    Report(RegularizeArgs),
    /// Re-run a recorded config.json into a new output directory.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Flat tail in the expected degree norms, no monopole or dipole.
    CmbLike,
    /// C(ell) = 1.
    Flat,
    /// C(ell) = (ell + 1)^(-exponent).
    PowerLaw,
}

/// Where the observed coefficients come from.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InputArgs {
    /// Coefficient CSV (`ell,m,re,im`) or grid field CSV.
    #[arg(long, conflicts_with = "preset")]
    pub input: Option<PathBuf>,
    /// Reject coefficient files without conjugate symmetry.
    #[arg(long)]
    pub require_real: bool,
    /// Draw a synthetic observed field from a preset spectrum.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Exponent of the power-law preset.
    #[arg(long, default_value_t = 2.0)]
    pub exponent: f64,
    /// Band limit of the synthetic field, or truncation of the input.
    #[arg(long)]
    pub band_limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BetaArgs {
    /// Degree weights: `const`, `csv <path>` or `powerlaw <p>`.
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "VALUE"], default_values = ["const"])]
    pub beta: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[group(id = "selector", required = true, multiple = false)]
pub struct Selector {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Target discrepancy sigma; lambda solves |a_r - a_o|_2 = sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Target hybrid norm kappa.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Target coefficient error; lambda is 0.999 times the guaranteed bound.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegularizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub beta: BetaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub selector: Selector,
    /// Also write grid fields and report field errors.
    #[arg(long)]
    pub grid: bool,
    /// Points of q(gamma) exported by `scale` and `report`.
    #[arg(long, default_value_t = 101)]
    pub gamma_samples: usize,
    /// Interior samples per frontier segment for `report`.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FrontierArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub beta: BetaArgs,
    /// Interior samples per segment.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub beta: BetaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub selector: Selector,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    /// Spectrum CSV (`ell,C`).
    #[arg(long, conflicts_with = "preset")]
    pub spectrum: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 2.0)]
    pub exponent: f64,
    #[arg(long)]
    pub band_limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spectrum: SpectrumArgs,
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,
    /// Also write each realization as a grid field.
    #[arg(long)]
    pub grid: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShrinkageKind {
    /// Degree-block soft-thresholding.
    Block,
    /// Per-coefficient soft-thresholding (not rotation invariant).
    Coefficientwise,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IsotropyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = ShrinkageKind::Block)]
    pub shrinkage: ShrinkageKind,
    #[arg(long, default_value_t = 2000)]
    pub realizations: usize,
    /// ZYZ Euler angles `alpha,beta,gamma` in radians.
    #[arg(long, value_delimiter = ',', num_args = 1, default_values = ["0.3", "1.1", "-0.4"], allow_hyphen_values = true)]
    pub rotation: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub significance: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A config.json written by an earlier run.
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command {
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Regularize(a) | Command::Scale(a) | Command::Report(a) => a.out.as_ref(),
            Command::Frontier(a) => a.out.as_ref(),
            Command::SolveLambda(a) => a.out.as_ref(),
            Command::Simulate(a) => a.out.as_ref(),
            Command::IsotropyTest(a) => a.out.as_ref(),
            Command::Replay(a) => Some(&a.out),
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        let slot = match self {
            Command::Regularize(a) | Command::Scale(a) | Command::Report(a) => &mut a.out,
            Command::Frontier(a) => &mut a.out,
            Command::SolveLambda(a) => &mut a.out,
            Command::Simulate(a) => &mut a.out,
            Command::IsotropyTest(a) => &mut a.out,
            Command::Replay(a) => {
                a.out = out;
                return;
            }
        };
        *slot = Some(out);
    }
}
