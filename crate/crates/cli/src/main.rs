//! `hawkes-lob`: simulate, fit, analyze and verify compound Hawkes mid-price
//! models.
//!
//! Exit codes: 0 success, 2 usage or model error, 3 verification failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hawkes-lob", version, about)]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for Monte Carlo ensembles.
    #[arg(long, global = true, env = "HAWKES_LOB_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one compound Hawkes path; writes events.csv and path.csv.
    Simulate(SimulateArgs),
    /// Maximum-likelihood fit of an exponential Hawkes process; writes fit.json.
    Fit(FitArgs),
    /// Run the empirical pipeline on a message/orderbook file pair.
    Analyze(AnalyzeArgs),
    /// Monte Carlo checks of the law of large numbers and the FCLT.
    Verify(VerifyArgs),
    /// Write a synthetic message/orderbook pair.
    Fixture(FixtureArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LinkArg {
    Identity,
    Indicator,
    Capped,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, value_enum, default_value = "identity")]
    link: LinkArg,
    /// Ceiling of the capped link.
    #[arg(long, default_value_t = 1.0)]
    ceiling: f64,
    /// Half-tick of the fixed-tick mark model.
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    /// Persistence probabilities `p_dd p_uu` of the fixed-tick chain.
    #[arg(long, num_args = 2, value_names = ["P_DD", "P_UU"], default_values_t = [0.5, 0.5])]
    p: Vec<f64>,
    /// Mark chain JSON `{"n", "P", "a"}`; replaces --delta and --p.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    horizon: f64,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV with a `time` column.
    #[arg(long)]
    events: PathBuf,
    /// Observation horizon; defaults to the last event time.
    #[arg(long)]
    horizon: Option<f64>,
    /// Cap on likelihood evaluations.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Chpdo,
    TwoState,
    Quantile,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    message: PathBuf,
    #[arg(long)]
    orderbook: PathBuf,
    #[arg(long, value_enum, default_value = "chpdo")]
    variant: VariantArg,
    /// Quantile levels for `--variant quantile`.
    #[arg(long, default_value_t = 16)]
    q: usize,
    /// Split the q levels across both signs instead of using q per side.
    #[arg(long)]
    quantiles_total: bool,
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    /// Seconds dropped at each end of the session.
    #[arg(long, default_value_t = 900.0)]
    trim: f64,
    /// Window grid in seconds; defaults to 10, 20, ..., 1200.
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    /// Window length of the clustering counts, seconds.
    #[arg(long, default_value_t = 1.0)]
    cluster_window: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Time scale of the limit theorems.
    #[arg(long, default_value_t = 1e4)]
    n: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    /// Centre the FCLT statistic with this value instead of the model's a*.
    #[arg(long, allow_hyphen_values = true)]
    a_star_override: Option<f64>,
    /// |z| above which a check fails.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    /// intc, msft, aapl, amzn or multi-magnitude.
    #[arg(long)]
    preset: String,
    /// Only write mid-price moves, without filler book updates.
    #[arg(long)]
    no_filler: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Failure classes mapped onto exit codes.
pub enum Failure {
    Usage(anyhow::Error),
    Verification(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be >= 1");
            return ExitCode::from(2);
        }
        hawkes_lob::par::set_jobs(jobs);
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, cli.seed),
        Command::Fit(a) => commands::fit(a, cli.seed),
        Command::Analyze(a) => commands::analyze(a, cli.seed),
        Command::Verify(a) => commands::verify(a, cli.seed),
        Command::Fixture(a) => commands::fixture(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
