//! `pamm`: quotes, curve dumps, thresholds, path simulation and property suites.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pamm_core::NumericMode;

#[derive(Parser, Debug)]
#[command(name = "pamm", version, about = "Primary-market AMM redemption engine")]
pub struct Cli {
    /// Static parameters JSON file.
    #[arg(long, global = true, env = "PAMM_PARAMS")]
    pub params: Option<PathBuf>,
    /// Numeric engine.
    #[arg(long, global = true, default_value = "fixed", value_parser = parse_mode)]
    pub mode: NumericMode,
    /// Output format; each command has its own default.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Variant {
    #[default]
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Independence,
    Deficiency,
}

fn parse_mode(s: &str) -> Result<NumericMode, String> {
    s.parse().map_err(|e: pamm_core::PammError| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// Redemption level.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Reserve value.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Outstanding supply.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quote a redemption from a state.
    Quote {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, allow_hyphen_values = true)]
        amount: String,
        #[arg(long, value_enum, default_value_t)]
        variant: Variant,
        /// Verified thresholds file; computed on the fly when absent.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Dump a redemption curve, for a state or an anchor.
    Curve {
        #[arg(long, allow_hyphen_values = true, requires_all = ["b", "y"], conflicts_with_all = ["ba", "family"])]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        y: Option<String>,
        /// Anchor reserve.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "family")]
        ba: Option<String>,
        /// Anchor supply.
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        ya: String,
        /// Comma-separated anchor ratios; writes one file per ratio for `y_a = 1`.
        #[arg(long, value_delimiter = ',')]
        family: Option<Vec<String>>,
        /// Directory for family files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, value_enum, default_value_t)]
        variant: Variant,
    },
    /// Compute the region thresholds.
    Precompute {
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a thresholds file against the parameters.
    Verify {
        thresholds: PathBuf,
    },
    /// Run a trading path and print its trace.
    Simulate {
        /// Path script JSON.
        #[arg(long)]
        script: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        /// Proportional redemption fee.
        #[arg(long, default_value = "0")]
        redeem_fee: String,
        /// Constant mint price.
        #[arg(long, default_value = "1")]
        mint_price: String,
        #[arg(long, value_enum)]
        check: Option<Check>,
    },
    /// Run the seeded property suites.
    Fuzz {
        /// Suites to run; all when omitted.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Override each suite's default case count.
        #[arg(long)]
        cases: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pamm: {f}");
            ExitCode::from(f.code())
        }
    }
}
