use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ophydro", version, about = "Operator-spreading hydrodynamics: spectra, decay rates and oracle checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum of T(p), of the dissipative operator P(γ)T(p), or of a truncated block.
    Spectrum(SpectrumArgs),
    /// Return probability ⟨n|T^t|n⟩ with its asymptote, plateau and fitted rate.
    Autocorr(AutocorrArgs),
    /// Leading dissipative eigenvalue over a grid of γ for several L.
    ScanGamma(ScanGammaArgs),
    /// Jump moments and dissipative limits of the long-range family T(p, ε).
    Counterexample(CounterexampleArgs),
    /// Random unitary circuit endpoint profiles against the hydrodynamic walk.
    RucCompare(RucCompareArgs),
    /// Re-run a recorded manifest and compare every output byte for byte.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Autocorr(_) => "autocorr",
            Command::ScanGamma(_) => "scan-gamma",
            Command::Counterexample(_) => "counterexample",
            Command::RucCompare(_) => "ruc-compare",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Run directory; created if missing. Defaults to `runs/<command>`.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: usize,
    /// Dissipation strength; selects P(γ)T(p).
    #[arg(long, conflicts_with = "ell")]
    pub gamma: Option<f64>,
    /// Dissipation constant c in e^{-cγx}.
    #[arg(long, default_value_t = 1.0, requires = "gamma")]
    pub c: f64,
    /// Truncation length; selects the ℓ×ℓ kept block.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Corner coupling of the block: `zero`, `stochastic` (= p²) or a number.
    #[arg(long, requires = "ell", default_value = "zero")]
    pub cprime: String,
    /// Also write the leading eigenvector.
    #[arg(long)]
    pub vectors: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AutocorrArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: usize,
    /// Start and return site (1-based).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub steps: usize,
    /// Inclusive fit window `t0,t1`; defaults to `[10, 0.7 t_plateau]`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub fit_window: Option<Vec<usize>>,
    /// Write an overlay plot.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanGammaArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long = "L-list", value_delimiter = ',', required = true)]
    #[serde(rename = "L_list")]
    pub l_list: Vec<usize>,
    /// Either `min:max:count` (log-spaced) or a comma-separated list.
    #[arg(long)]
    pub gamma_grid: String,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon_list: Vec<f64>,
    /// Sites of each banded matrix.
    #[arg(long = "L", default_value_t = 40)]
    #[serde(rename = "L")]
    pub l: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RucCompareArgs {
    #[arg(long)]
    pub qubits: usize,
    /// Brick-wall layers.
    #[arg(long)]
    pub depth: usize,
    #[arg(long)]
    pub realizations: usize,
    #[arg(long)]
    pub seed: u64,
    /// Cell alignment: 0 pairs qubits (2G, 2G+1), 1 shifts the pairing by one.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A run directory or its manifest.json.
    pub manifest: PathBuf,
    /// Directory for the replayed outputs. Defaults to `<run>-replay`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
