use clap::{Parser, Subcommand};
use cosctl::jobs::{dispatch, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Integrals ∫ w(x) g(x) dx from characteristic functions by the (damped)
/// COS method: option prices, CDFs, absolute moments, parameter tuning,
/// convergence studies and Monte Carlo comparisons.
#[derive(Parser)]
#[command(name = "cosctl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Job config (flat `key = value` lines with dotted section prefixes).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (convergence and compare-mc).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for Monte Carlo substreams.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Escalate plateau warnings (floating-point floor in the term-count
    /// search) into failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Discounted European option price with auto-tuned parameters.
    Price(CommonArgs),
    /// CDF of the model density at the configured thresholds.
    Cdf(CommonArgs),
    /// Absolute moment E|X| of the (1-d) model density.
    Moment(CommonArgs),
    /// Print the selected truncation range and term count only.
    Tune(CommonArgs),
    /// Error-vs-terms study against the high-resolution oracle (CSV).
    Convergence(CommonArgs),
    /// COS vs Monte Carlo timing table on the BS digital put (CSV).
    CompareMc(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Price(a) => ("price", a),
        Command::Cdf(a) => ("cdf", a),
        Command::Moment(a) => ("moment", a),
        Command::Tune(a) => ("tune", a),
        Command::Convergence(a) => ("convergence", a),
        Command::CompareMc(a) => ("compare-mc", a),
    };
    let opts = RunOptions {
        out: args.out.clone(),
        seed: args.seed,
        threads: args.threads.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }),
        strict: args.strict,
    };
    match dispatch(name, &args.config, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
