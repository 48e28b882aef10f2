//! `mathieu-cert`: stability certificates for Mathieu-type equations.
//!
//! Exit codes: 0 certified, 1 invalid input, 2 `μ > μ₀`, 3 Bogolyubov
//! condition fails.

mod commands;
mod input;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "mathieu-cert", version, about = "Stability certificates for Mathieu-type equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full certificate at one μ (JSON).
    Certify(CertifyArgs),
    /// Robustness budgets at one μ (JSON).
    Margins(CommonArgs),
    /// Nonlinear trajectory with envelope columns (CSV).
    Simulate(SimulateArgs),
    /// Spectral-radius chart over a (β, μ) grid (CSV or JSON).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model JSON: a Mathieu model or pendulum parameters.
    #[arg(long, value_name = "FILE")]
    model: std::path::PathBuf,
    /// Perturbation JSON.
    #[arg(long, value_name = "FILE")]
    pert: Option<std::path::PathBuf>,
    /// Radius of the local remainder bound (default π/2 for sine models).
    #[arg(long)]
    rho: Option<f64>,
    /// Quadrature points per period (even, ≥ 16).
    #[arg(long, default_value_t = 2048)]
    grid: usize,
    /// RK4 steps per period.
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Small parameter: a number, `K*mu0`, or omitted for pendulum files
    /// (then `a/l`).
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dump the sampled periodic Lyapunov matrix as CSV.
    #[arg(long, value_name = "FILE")]
    dump_lyapunov: Option<std::path::PathBuf>,
    /// Dump averaging data (U₁, H₁, C-matrix extrema) as JSON.
    #[arg(long, value_name = "FILE")]
    dump_averaging: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Initial deviation y(0) − γ.
    #[arg(long, allow_hyphen_values = true)]
    y0: f64,
    /// Initial velocity y'(0).
    #[arg(long, allow_hyphen_values = true)]
    y1: f64,
    /// End time.
    #[arg(long)]
    t_end: f64,
    /// Keep every n-th integration step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// μ values: comma list or `log:START:STOP:N`.
    #[arg(long, allow_hyphen_values = true)]
    mu_grid: String,
    /// β values: comma list or `lin:START:STOP:N`.
    #[arg(long, allow_hyphen_values = true)]
    beta_grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    // Usage errors must not collide with the range-failure code 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Certify(a) => commands::certify(&a),
        Command::Margins(a) => commands::margins(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
