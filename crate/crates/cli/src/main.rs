//! `dssm`: simulate, fit and evaluate delay-embedded SSM models.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "dssm", version, about = "Spectral submanifold models from delay-embedded data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark system to a trajectory CSV.
    Simulate(SimulateArgs),
    /// Fit a model to one or more trajectory files.
    Fit(FitArgs),
    /// Predict a trajectory from the first window of a file.
    Predict(PredictArgs),
    /// Per-mode amplitudes |ξ_k(t)| from projection on the tangent basis.
    ModalContent(ModalContentArgs),
    /// Grid search for the timelag multiplier and embedding dimension.
    OptimizeDelays(OptimizeArgs),
    /// Frequency and damping backbone of one mode pair of a model.
    Backbone(BackboneArgs),
    /// Randomized checks of the tangent-space theorems.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemName {
    Osc2dof,
    Multimode,
    SloshingSpectrum,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    system: SystemName,
    /// `modal:w1,w2,…` (weights on linear mode shapes, slowest first) or `zero`.
    #[arg(long, default_value = "modal:0.3", conflicts_with = "x0")]
    ic: String,
    /// Explicit initial state, comma separated.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 300.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Channel expression over the state (`ch0` = x₁, …); default: the
    /// displacements (first half of the state).
    #[arg(long)]
    observe: Option<String>,
    /// Integrator relative tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Coupling scale of the multimode system.
    #[arg(long, default_value_t = 0.5)]
    coupling: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Sloshing tank width (m).
    #[arg(long, default_value_t = 0.5)]
    width: f64,
    /// Sloshing fill depth (m).
    #[arg(long, default_value_t = 0.4)]
    depth: f64,
    #[arg(long, default_value_t = 9.81)]
    gravity: f64,
    /// Number of sloshing modes.
    #[arg(long, default_value_t = 5)]
    modes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct EmbedArgs {
    /// Continuous-time eigenvalues, e.g. "-0.015+0.9999i,-0.015-0.9999i".
    #[arg(long, allow_hyphen_values = true)]
    eigs: String,
    /// Mode-shape CSV (q rows × d columns), required for several channels.
    #[arg(long)]
    shapes: Option<PathBuf>,
    #[arg(long)]
    kappa: usize,
    #[arg(long)]
    p: usize,
    /// Sampling step; read from the trajectory file when omitted.
    #[arg(long)]
    dt: Option<f64>,
    /// Channel expression over the file columns (`ch1`, `ch1-ch0`, `ch0;ch1`).
    #[arg(long)]
    channels: Option<String>,
    /// Observable value at the equilibrium, comma separated (default 0).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "tail_fraction")]
    equilibrium: Option<String>,
    /// Estimate the fixed point as the mean of this final fraction of the
    /// longest trajectory.
    #[arg(long)]
    tail_fraction: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(required = true)]
    trajectories: Vec<PathBuf>,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long, default_value_t = 3)]
    order_m: u32,
    #[arg(long, default_value_t = 3)]
    order_r: u32,
    #[arg(long, default_value_t = 3)]
    order_h: u32,
    #[arg(long, default_value_t = 0.0)]
    start_time: f64,
    /// Relative resonance tolerance.
    #[arg(long, default_value_t = 0.1)]
    tol_res: f64,
    /// Fit even when the genericity check fails.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Trajectory whose first window sets the initial condition; also the
    /// reference for NMTE.
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    channels: Option<String>,
    /// Prediction horizon after the first sample (default: span of the file).
    #[arg(long)]
    t_end: Option<f64>,
    /// Samples before this time are dropped before prediction.
    #[arg(long, default_value_t = 0.0)]
    start_time: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModalContentArgs {
    traj: PathBuf,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    eigs: String,
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 1)]
    kappa_min: usize,
    #[arg(long, default_value_t = 10)]
    kappa_max: usize,
    #[arg(long, default_value_t = 2)]
    p_min: usize,
    #[arg(long, default_value_t = 60)]
    p_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BackboneArgs {
    #[arg(long)]
    model: PathBuf,
    /// Mode pair, counted from 1.
    #[arg(long, default_value_t = 1)]
    pair: usize,
    #[arg(long, default_value_t = 1.0)]
    rho_max: f64,
    #[arg(long, default_value_t = 51)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Theorem1,
    Theorem2,
    Theorem3,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Random systems per suite.
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::ModalContent(a) => commands::modal_content(a),
        Command::OptimizeDelays(a) => commands::optimize_delays(a),
        Command::Backbone(a) => commands::backbone(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
