//! Command-line surface. Every argument struct serializes into the run
//! manifest's `config` block, which is the authoritative record for
//! reproducing a run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "boxctl",
    version,
    about = "Quantum box toolkit: exact spectra, pump-cycle permutations, wall-motion propagation, and bilinear control synthesis",
    after_help = "Each run writes CSV series plus a manifest.json that echoes the full \
                  configuration. BOXCTL_THREADS is accepted and recorded; the current \
                  modules run single-threaded."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Energy-ordered Dirichlet spectrum of a rectangle
    Spectrum(SpectrumArgs),
    /// Eigenvalue crossings along a linear sweep of the first side
    Crossings(CrossingsArgs),
    /// Rank permutation of one pump cycle between two boxes
    Sigma(SigmaArgs),
    /// Orbit of one rank under repeated pump cycles
    Orbit(OrbitArgs),
    /// Mean entropy increase deltaE(K) against its closed-form limit
    Entropy(EntropyArgs),
    /// Propagate an eigenmode along a wall motion
    Evolve(EvolveArgs),
    /// Pump cycle with a symmetry-breaking drive on the return leg
    Pump(PumpArgs),
    /// Tune the drive blend until the final state splits evenly
    Split(SplitArgs),
    /// Synthesize a wall trajectory from a bilinear control profile
    Synthesize(SynthesizeArgs),
    /// Boundary functionals of a resonant pair: table, closed forms, rank
    Sah2(Sah2Args),
}

#[derive(Args, Serialize)]
pub struct SpectrumArgs {
    /// First side length
    #[arg(long)]
    pub a: f64,
    /// Second side length
    #[arg(long)]
    pub b: f64,
    /// Number of modes to list
    #[arg(long)]
    pub count: usize,
    /// Relative tolerance for reporting near-degenerate neighbors
    #[arg(long, default_value_t = 1e-12)]
    pub tie_tol: f64,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct CrossingsArgs {
    /// First side at the start of the sweep
    #[arg(long)]
    pub a0: f64,
    /// First side at the end of the sweep
    #[arg(long)]
    pub a1: f64,
    /// Fixed second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Largest first quantum number in the scanned band
    #[arg(long, default_value_t = 6)]
    pub m_max: u32,
    /// Largest second quantum number in the scanned band
    #[arg(long, default_value_t = 6)]
    pub n_max: u32,
    /// Sweep duration (crossing times are reported on [0, duration])
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SigmaArgs {
    /// First side of the source box
    #[arg(long)]
    pub a: f64,
    /// First side of the compressed box
    #[arg(long)]
    pub atilde: f64,
    /// Common second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Number of ranks to certify
    #[arg(long, default_value_t = 10_000)]
    pub k_table: usize,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct OrbitArgs {
    /// First side of the source box
    #[arg(long)]
    pub a: f64,
    /// First side of the compressed box
    #[arg(long)]
    pub atilde: f64,
    /// Common second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Starting rank
    #[arg(long)]
    pub start: usize,
    /// Number of ranks to certify before iterating
    #[arg(long, default_value_t = 100_000)]
    pub k_table: usize,
    /// Iteration budget
    #[arg(long, default_value_t = 256)]
    pub max_steps: usize,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EntropyArgs {
    /// First side of the source box
    #[arg(long)]
    pub a: f64,
    /// First side of the compressed box
    #[arg(long)]
    pub atilde: f64,
    /// Common second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Number of ranks averaged in deltaE(K)
    #[arg(long = "K")]
    pub k: usize,
    /// Number of logarithmically spaced checkpoints in the CSV
    #[arg(long, default_value_t = 12)]
    pub checkpoints: usize,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepProfile {
    /// Constant wall speed (nonzero end velocities)
    Linear,
    /// Smootherstep ramp (walls at rest at both ends)
    Smooth,
}

#[derive(Args, Serialize)]
pub struct EvolveArgs {
    /// First quantum number of the initial mode
    #[arg(long)]
    pub m: u32,
    /// Second quantum number of the initial mode
    #[arg(long)]
    pub n: u32,
    /// First side at the start (sweep mode)
    #[arg(long, required_unless_present = "control", conflicts_with = "control")]
    pub a0: Option<f64>,
    /// First side at the end (sweep mode)
    #[arg(long, required_unless_present = "control", conflicts_with = "control")]
    pub a1: Option<f64>,
    /// Fixed second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Sweep duration (sweep mode)
    #[arg(long, required_unless_present = "control", conflicts_with = "control")]
    pub duration: Option<f64>,
    /// Wall-speed profile of the sweep
    #[arg(long, value_enum, default_value_t = SweepProfile::Smooth)]
    pub profile: SweepProfile,
    /// Follow a synthesized control law (control.json from `boxctl synthesize`)
    /// instead of a sweep
    #[arg(long)]
    pub control: Option<PathBuf>,
    /// Galerkin modes along the first axis
    #[arg(long, default_value_t = 16)]
    pub n1: usize,
    /// Galerkin modes along the second axis
    #[arg(long, default_value_t = 16)]
    pub n2: usize,
    /// Time step (default: 0.1 over the largest retained energy)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct PumpArgs {
    /// First side of the resting box
    #[arg(long)]
    pub a: f64,
    /// First side at the turning point
    #[arg(long)]
    pub a_prime: f64,
    /// Fixed second side
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// First quantum number of the pumped mode
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Second quantum number of the pumped mode
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Inverse leg duration: each leg lasts 1/speed
    #[arg(long)]
    pub speed: f64,
    /// Symmetry-breaker strength on the return leg
    #[arg(long, default_value_t = 28.0)]
    pub strength: f64,
    /// Seed of the symmetry-breaking potential
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Galerkin modes along the first axis
    #[arg(long, default_value_t = 16)]
    pub n1: usize,
    /// Galerkin modes along the second axis
    #[arg(long, default_value_t = 16)]
    pub n2: usize,
    /// Time step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SplitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pump: PumpArgs,
    /// Target amplitude on the crossing partner (population alpha^2)
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub alpha: f64,
    /// Population tolerance of the blend search
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
}

#[derive(Args, Serialize)]
pub struct SynthesizeArgs {
    /// Side length of the resting box
    #[arg(long)]
    pub a: f64,
    /// Total squeezed time the trajectory must realize
    #[arg(long)]
    pub tau_f: f64,
    /// Initial value of the auxiliary profile U (default: smallest safe value)
    #[arg(long)]
    pub u0: Option<f64>,
    /// Constant control potential V
    #[arg(long, conflicts_with = "v_csv", allow_negative_numbers = true)]
    pub v_const: Option<f64>,
    /// Sampled control potential: CSV with header and columns tau,v
    /// (linear interpolation, clamped outside the sampled range)
    #[arg(long)]
    pub v_csv: Option<PathBuf>,
    /// Number of grid intervals in shape.csv (which gets samples + 1 rows)
    #[arg(long, default_value_t = 801)]
    pub samples: usize,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Serialize)]
pub struct Sah2Args {
    /// First quantum number of the first mode
    #[arg(long)]
    pub k1: u32,
    /// Second quantum number of the first mode
    #[arg(long)]
    pub k2: u32,
    /// First quantum number of the second mode
    #[arg(long)]
    pub l1: u32,
    /// Second quantum number of the second mode
    #[arg(long)]
    pub l2: u32,
    /// Fixed second side (the first side is set by the resonance)
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Directory for outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Self-contained record of a synthesized control problem; written next to
/// shape.csv and consumed by `boxctl evolve --control`. Re-synthesizing from
/// it reproduces the exact trajectory (the integration is deterministic), so
/// no interpolation of the shape is ever needed.
#[derive(Serialize, Deserialize, Clone)]
pub struct ControlSpec {
    pub a: f64,
    pub tau_f: f64,
    pub u0: f64,
    pub samples: usize,
    pub v: VSpec,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VSpec {
    Constant { value: f64 },
    /// Piecewise-linear in tau, clamped to the end values outside the range.
    Samples { tau: Vec<f64>, value: Vec<f64> },
}
