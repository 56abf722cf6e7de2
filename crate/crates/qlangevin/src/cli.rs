use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qlangevin", version, about = "Repeated quantum interactions and their Langevin limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Rescaled GNS coefficients of the interaction unitary against their limits.
    Coeffs(CoeffsArgs),
    /// Distance between repeated interactions and the limit semigroup as τ shrinks.
    Converge(ConvergeArgs),
    /// Populations and coherences along the limit semigroup.
    Evolve(EvolveArgs),
    /// Invariant state, commutants, spectral gap and relaxation of the limit generator.
    Thermalize(ThermalizeArgs),
    /// Brute-force chain simulation against the iterated one-step channel.
    Oracle(OracleArgs),
    /// Thermal Itô table, coth identity and unitarity checks.
    #[command(name = "ito-check")]
    ItoCheck(ItoArgs),
    /// Eigenvalues of the limit generator.
    Spectrum(SpectrumArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs",
            Command::Converge(_) => "converge",
            Command::Evolve(_) => "evolve",
            Command::Thermalize(_) => "thermalize",
            Command::Oracle(_) => "oracle",
            Command::ItoCheck(_) => "ito-check",
            Command::Spectrum(_) => "spectrum",
        }
    }

    pub fn io(&self) -> &IoArgs {
        match self {
            Command::Coeffs(a) => &a.io,
            Command::Converge(a) => &a.io,
            Command::Evolve(a) => &a.io,
            Command::Thermalize(a) => &a.io,
            Command::Oracle(a) => &a.io,
            Command::ItoCheck(a) => &a.io,
            Command::Spectrum(a) => &a.io,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output file. Tables are written as CSV with a JSON report at `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Seed for the random initial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start from basis state |k⟩ instead of a random state.
    #[arg(long)]
    pub initial: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Descending interaction times (default 2^-8, ..., 2^-14).
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub state: StateArgs,
    /// Descending interaction times.
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.01, 0.005, 0.0025])]
    pub taus: Vec<f64>,
    /// Final time.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.7)]
    pub min_slope: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub state: StateArgs,
    /// Final time.
    #[arg(long, default_value_t = 10.0)]
    pub t: f64,
    /// Number of equally spaced output times, including 0 and t.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ThermalizeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub state: StateArgs,
    /// Final relaxation time (default 20 / spectral gap).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 81)]
    pub points: usize,
    /// Bound on the trace norm of L(ρ_β).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub state: StateArgs,
    /// Number of chain sites.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ItoArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Seed for the random coefficient draws.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub io: IoArgs,
}
