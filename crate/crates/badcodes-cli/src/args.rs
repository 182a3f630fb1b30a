//! Command-line grammar. Every flag of a subcommand can also be given as a
//! key of the same name in a TOML file passed with `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "badcodes", version, about = "Bad LDPC codes for erasure relay and BIAWGN interference channels")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file whose keys mirror the subcommand's flag names. Flags given
    /// on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the result table as CSV, preceded by a provenance header.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Worker threads for campaigns, sweeps and density evolution
    /// (0 = one per core).
    #[arg(long, global = true, env = "BADCODES_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// BEC density evolution. CSV: iteration, rightbound_erasure.
    DeBec(DeBecArgs),
    /// Relay/destination pair density evolution. CSV: iteration,
    /// relay_rightbound, destination_rightbound, destination_erasure.
    SimDe(SimDeArgs),
    /// Stopping-set bound curves. CSV: dhat2, i_plus, i1_plus, i2_plus,
    /// naive, good_code.
    Bounds(BoundsArgs),
    /// Smallest quantization noise for a relay link capacity. CSV: c_o,
    /// min_dhat2, good_code_dhat2, i_plus_at_min.
    MinDhat2(MinDhat2Args),
    /// Benchmark rates. CSV: name, value, conditional.
    Rates(RatesArgs),
    /// Uncoded and good-code MMSE curves. CSV: snr, uncoded, good_code.
    MmseCurves(MmseArgs),
    /// Interference-channel density evolution. CSV: iteration, primary_ber,
    /// interference_ber, symmetry_defect.
    SoftIcDe(SoftIcDeArgs),
    /// Monte-Carlo relay campaign. CSV: trial, relay, quantized,
    /// destination, simbp.
    SimulateRelay(SimulateRelayArgs),
    /// Monte-Carlo interference campaign. CSV: iteration, primary_ber,
    /// interference_ber.
    SimulateIc(SimulateIcArgs),
    /// Relay degree-distribution optimizer. CSV: iteration, design_rate,
    /// dhat2, error_rate, admissible, accepted, min_slack, note, lambda.
    OptimizeRelay(OptimizeRelayArgs),
    /// Interference degree-distribution optimizer. CSV: iteration,
    /// design_rate, error_rate, interference_ber, admissible, accepted,
    /// min_slack, note, lambda.
    OptimizeIc(OptimizeIcArgs),
    /// Han-Kobayashi badness certificate. CSV: s, t, p_u, min_snr, i_u,
    /// i_w, i_uw.
    HkCheck(HkArgs),
    /// Exhaustive stopping-set counts against the growth-rate bound. CSV:
    /// size, alpha, mean_count, growth_rate, f_alpha.
    StoppingOracle(StoppingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DeBec(_) => "de-bec",
            Command::SimDe(_) => "sim-de",
            Command::Bounds(_) => "bounds",
            Command::MinDhat2(_) => "min-dhat2",
            Command::Rates(_) => "rates",
            Command::MmseCurves(_) => "mmse-curves",
            Command::SoftIcDe(_) => "soft-ic-de",
            Command::SimulateRelay(_) => "simulate-relay",
            Command::SimulateIc(_) => "simulate-ic",
            Command::OptimizeRelay(_) => "optimize-relay",
            Command::OptimizeIc(_) => "optimize-ic",
            Command::HkCheck(_) => "hk-check",
            Command::StoppingOracle(_) => "stopping-oracle",
        }
    }

    /// Random seed of the run, for commands that draw random numbers.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::SimulateRelay(a) => Some(a.seed),
            Command::SimulateIc(a) => Some(a.seed),
            Command::StoppingOracle(a) => Some(a.seed),
            _ => None,
        }
    }
}

/// Edge distribution: `--regular c,d`, or `--lambda` with `--rho` as
/// `degree:weight` lists such as `2:0.3,3:0.7`.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EnsembleArgs {
    /// Regular ensemble `c,d`.
    #[arg(long, conflicts_with_all = ["lambda", "rho"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regular: Option<String>,
    /// Variable-side edge fractions, normalized on input.
    #[arg(long, requires = "rho")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// Check-side edge fractions, normalized on input.
    #[arg(long, requires = "lambda")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DeBecArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Channel erasure probability.
    #[arg(long)]
    pub delta: f64,
    /// Iterations.
    #[arg(long, default_value_t = 2000)]
    pub t: usize,
    /// Also compute the BP threshold.
    #[arg(long)]
    pub threshold: bool,
}

/// Relay channel erasure probabilities.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ErasureLinks {
    /// Source-to-relay erasure probability.
    #[arg(long)]
    pub d2: f64,
    /// Source-to-destination erasure probability.
    #[arg(long)]
    pub d3: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimDeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub links: ErasureLinks,
    /// Quantization erasure probability.
    #[arg(long)]
    pub dhat2: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    /// Stop once the destination erasure changes by less than this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub links: ErasureLinks,
    /// Grid points on [0, 1].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MinDhat2Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub links: ErasureLinks,
    /// Relay-to-destination capacity in bits.
    #[arg(long)]
    pub co: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RatesArgs {
    /// Relay point as `d2=.. d3=.. co=..`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relay: Vec<String>,
    /// Interference point as `h=.. sigma=..`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub interference: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MmseArgs {
    /// Code rate whose Shannon limit splits the good-code curve.
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub snr_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub snr_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

/// Interference channel `Y = X1 + h X2 + Z`, `Z ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InterferenceLink {
    /// Cross gain.
    #[arg(long)]
    pub h: f64,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditioningArg {
    /// Own bit fixed, paired bit uniform.
    Averaged,
    /// Both bits fixed to +1.
    AllPlus,
}

/// LLR grid and density-evolution settings.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// Bins per side of zero.
    #[arg(long, default_value_t = 2048)]
    pub bins: usize,
    /// Largest LLR magnitude on the grid.
    #[arg(long, default_value_t = 30.0)]
    pub l_max: f64,
    /// Noise cells per state table.
    #[arg(long, default_value_t = 6000)]
    pub z_cells: usize,
    #[arg(long, value_enum, default_value_t = ConditioningArg::Averaged)]
    pub conditioning: ConditioningArg,
    /// Freeze the interference decoder once its rightbound functional
    /// drops below this value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_threshold: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SoftIcDeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub link: InterferenceLink,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Iteration budget.
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    /// Stop once both BERs change by less than this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateRelayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub links: ErasureLinks,
    #[arg(long)]
    pub co: f64,
    #[arg(long)]
    pub dhat2: f64,
    /// Block length.
    #[arg(long)]
    pub n: usize,
    /// BP iterations.
    #[arg(long, default_value_t = 200)]
    pub t: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordsArg {
    /// Uniform random codeword pairs decoded as cosets.
    Random,
    /// All-(+1) codewords.
    AllPlus,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateIcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub link: InterferenceLink,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub t: usize,
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WordsArg::Random)]
    pub words: WordsArg,
}

/// Settings shared by both optimizers.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClimbArgs {
    /// Closeness parameter.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    /// Candidate degrees added to the seed's support, as a list of
    /// degrees and ranges such as `2-30,50,100`.
    #[arg(long, default_value = "2-30,50,100")]
    pub candidates: String,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimizeRelayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub links: ErasureLinks,
    #[arg(long)]
    pub co: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub climb: ClimbArgs,
    /// sim-DE iteration budget.
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    /// Largest admissible destination erasure probability.
    #[arg(long, default_value_t = 2e-5)]
    pub epsilon_target: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimizeIcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub link: InterferenceLink,
    #[command(flatten)]
    #[serde(flatten)]
    pub climb: ClimbArgs,
    /// Margin of the stability row.
    #[arg(long, default_value_t = 0.02)]
    pub eta_prime: f64,
    /// Largest admissible primary BER.
    #[arg(long, default_value_t = 1e-5)]
    pub ber_target: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HkArgs {
    /// Rate carried by the biased layer `U`.
    #[arg(long)]
    pub s: f64,
    /// Rate carried by the uniform layer `W`.
    #[arg(long)]
    pub t: f64,
    /// Bernoulli parameter of `U`.
    #[arg(long)]
    pub pu: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StoppingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Block length (at most 25).
    #[arg(long)]
    pub n: usize,
    /// Sampled graphs.
    #[arg(long, default_value_t = 100)]
    pub graphs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
