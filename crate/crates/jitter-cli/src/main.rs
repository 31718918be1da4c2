use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};

use jitter_cli::error::CliResult;
use jitter_cli::verify::Suite;
use jitter_cli::{config, landscape, report, runner, sweep, verify};

#[derive(Parser)]
#[command(
    name = "jitter",
    version,
    about = "Train with jittered or flooded losses, verify the math, and compare runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one training run from a config file.
    Train {
        /// Path to a run config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output_dir (the run id stays the same).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the toolkit's mathematical claims by Monte Carlo and exact math.
    Verify {
        /// Which suite to run.
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        /// Base seed for every Monte Carlo stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a 1-D curve, flip it at the given levels, and count minima.
    Landscape {
        /// Named curve (parabola, double-well) or a two-column CSV path.
        curve: String,
        /// Grid start (named curves only).
        #[arg(long)]
        lo: Option<f64>,
        /// Grid end (named curves only).
        #[arg(long)]
        hi: Option<f64>,
        /// Grid size (named curves only).
        #[arg(long, default_value_t = landscape::DEFAULT_GRID)]
        grid: usize,
        /// Flooding levels to flip at, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.25")]
        levels: Vec<f64>,
        /// Write the curve CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a wrapper-by-seed grid concurrently, then build the report.
    Sweep {
        /// Path to a sweep config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate run records from a directory into a comparison report.
    Report {
        /// Directory holding per-run .json records.
        #[arg(long)]
        dir: PathBuf,
        /// Where to write report.csv and report.txt (default: --dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    #[value(name = "theorem1")]
    Theorem1,
    #[value(name = "theorem2")]
    Theorem2,
    #[value(name = "jensen")]
    Jensen,
    #[value(name = "all")]
    All,
}

impl From<SuiteArg> for Suite {
    fn from(arg: SuiteArg) -> Suite {
        match arg {
            SuiteArg::Theorem1 => Suite::Theorem1,
            SuiteArg::Theorem2 => Suite::Theorem2,
            SuiteArg::Jensen => Suite::Jensen,
            SuiteArg::All => Suite::All,
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { config, out } => {
            let run_config = config::load_run_config(&config)?;
            let resolved = config::resolve_run(&run_config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&resolved.output_dir));
            let record = runner::execute(&resolved, &out_dir)?;
            println!(
                "run {} ({}, seed {}): {} epochs in {:.1}s",
                resolved.run_id,
                resolved.spec.wrapper_label,
                resolved.spec.seed,
                record.metrics.len(),
                record.duration_seconds
            );
            if let Some(last) = record.metrics.last() {
                println!(
                    "final raw train loss {:.6}, test accuracy {:.4}",
                    last.raw_train_loss, last.test_accuracy
                );
            }
            Ok(())
        }
        Command::Verify { suite, n, seed } => verify::run_suite(suite.into(), n, seed),
        Command::Landscape {
            curve,
            lo,
            hi,
            grid,
            levels,
            out,
        } => landscape::run(&curve, lo, hi, grid, &levels, out.as_deref()),
        Command::Sweep { config, out } => sweep::run(&config, out.as_deref()),
        Command::Report { dir, out } => report::run(&dir, out.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("{e}");
        process::exit(e.exit_code());
    }
}
