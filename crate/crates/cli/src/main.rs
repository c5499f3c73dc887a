use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use rfluct_cli::commands::{self, Outcome};
use rfluct_cli::config::{Mode, Overrides, RunConfig};
use rfluct_cli::error::{CliError, ExitCode, EXIT_CODE_HELP};
use rfluct_cli::ingest::{Column, ColumnSpec};
use rfluct_core::fluctuation::AutocorrMode;

/// Resonance-fluctuation simulations and strength-function estimates.
#[derive(Parser, Debug)]
#[command(name = "rfluct", version, after_help = EXIT_CODE_HELP)]
struct Cli {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every sampling step; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts.
    #[arg(long, global = true, env = "RFLUCT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Mode used by `run`; overrides the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Opening window for `predict`, in seconds.
    #[arg(long, global = true)]
    train_window: Option<f64>,
    /// Relative drift above which `predict` reports drifted.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Amplitude autocorrelation normalizer: mean-normalized or variance-normalized.
    #[arg(long, global = true)]
    autocorr_mode: Option<AutocorrMode>,
    /// Skip linear detrending before correlating.
    #[arg(long, global = true)]
    no_detrend: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run whichever mode the configuration selects.
    Run,
    /// Generate synthetic spectra or sessions.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Estimate coherence width, mean spacing and their ratio from a CSV.
    Estimate(InputArgs),
    /// Compare the opening window of a session with the remainder.
    Predict(InputArgs),
    /// Statistical reproductions.
    #[command(subcommand)]
    Stats(Stats),
}

#[derive(Subcommand, Debug)]
enum Simulate {
    /// Cross-section spectra sharing one level ladder across strengths.
    Nuclear,
    /// A synthetic intraday index session.
    Index,
}

#[derive(Subcommand, Debug)]
enum Stats {
    /// Intensity histogram, empirical correlations and the Lorentzian table.
    Demo,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Two-column CSV of timestamps (seconds) and values.
    input: PathBuf,
    /// Timestamp column: 1-based position or header name.
    #[arg(long, default_value = "1")]
    time_column: Column,
    /// Value column: 1-based position or header name.
    #[arg(long, default_value = "2")]
    value_column: Column,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

impl InputArgs {
    fn columns(&self) -> ColumnSpec {
        ColumnSpec {
            time: self.time_column.clone(),
            value: self.value_column.clone(),
            delimiter: self.delimiter,
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        mode: cli.mode,
        train_window: cli.train_window,
        threshold: cli.threshold,
        autocorr_mode: cli.autocorr_mode,
        no_detrend: cli.no_detrend,
    })?;
    match &cli.command {
        Command::Run => commands::run(&config),
        Command::Simulate(Simulate::Nuclear) => commands::simulate_nuclear(&config),
        Command::Simulate(Simulate::Index) => commands::simulate_index(&config),
        Command::Estimate(args) => commands::estimate(&config, &args.input, &args.columns()),
        Command::Predict(args) => commands::predict(&config, &args.input, &args.columns()),
        Command::Stats(Stats::Demo) => commands::stats_demo(&config),
    }
}

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            process::exit(outcome.exit.unwrap_or(ExitCode::Ok) as i32);
        }
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(e.exit_code() as i32);
        }
    }
}
