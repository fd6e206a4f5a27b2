use std::path::PathBuf;
use std::process::ExitCode;

use ammlab::commands::{cmd_run, cmd_synth, cmd_validate, SynthOptions};
use ammlab::config::Overrides;
use clap::{Parser, Subcommand};

/// Deterministic laboratory for automated market makers.
#[derive(Parser)]
#[command(name = "ammlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a feed file for defects.
    Validate {
        /// Feed CSV path.
        feed: PathBuf,
    },
    /// Generate a synthetic feed (kinds: flat, random_walk, bull, bear,
    /// crash).
    Synth {
        kind: String,
        #[arg(long, default_value_t = 720)]
        hours: usize,
        #[arg(long, default_value_t = 4)]
        tokens: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "feed.csv")]
        out: PathBuf,
        /// Timestamp of the first row.
        #[arg(long, default_value = "2024-01-01T00:00:00Z")]
        start: String,
        /// Initial prices: one value, or one per token.
        #[arg(long, value_delimiter = ',')]
        prices: Option<Vec<f64>>,
        /// Initial market caps: one value, or one per token.
        #[arg(long, value_delimiter = ',')]
        caps: Option<Vec<f64>>,
        /// Initial daily volumes: one value, or one per token.
        #[arg(long, value_delimiter = ',')]
        volumes: Option<Vec<f64>>,
        /// Log-price drift per hour.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        drift: f64,
        /// Per-token drifts: one value, or one per token.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        drifts: Option<Vec<f64>>,
        /// Log-price volatility per hour.
        #[arg(long, default_value_t = 0.005)]
        volatility: f64,
        /// Total relative volume change over the window.
        #[arg(long, allow_negative_numbers = true)]
        volume_growth: Option<f64>,
        /// Terminal total-market-cap factor (bull/bear).
        #[arg(long)]
        cap_growth: Option<f64>,
        /// Token symbol that crashes (crash kind).
        #[arg(long)]
        crash_token: Option<String>,
        /// Hour the crash decay starts.
        #[arg(long)]
        crash_start_hour: Option<usize>,
        /// Fraction of the initial price the crashed token ends at.
        #[arg(long, default_value_t = 0.01)]
        crash_depth: f64,
    },
    /// Run a scenario from a config or manifest file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Comma-separated maker list.
        #[arg(long)]
        makers: Option<String>,
        /// Comma-separated k sweep.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        swaps_per_hour: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { feed } => cmd_validate(&feed).map(Some),
        Command::Synth {
            kind,
            hours,
            tokens,
            seed,
            out,
            start,
            prices,
            caps,
            volumes,
            drift,
            drifts,
            volatility,
            volume_growth,
            cap_growth,
            crash_token,
            crash_start_hour,
            crash_depth,
        } => {
            let opts = SynthOptions {
                kind,
                hours,
                tokens,
                seed,
                out,
                start,
                prices,
                caps,
                volumes,
                drift,
                drifts,
                volatility,
                volume_growth,
                cap_growth,
                crash_token,
                crash_start_hour,
                crash_depth,
            };
            cmd_synth(&opts).map(|()| None)
        }
        Command::Run {
            config,
            seed,
            out_dir,
            makers,
            k,
            swaps_per_hour,
        } => {
            let overrides = Overrides {
                seed,
                out_dir,
                makers,
                k_values: k,
                swaps_per_hour,
            };
            cmd_run(&config, &overrides).map(Some)
        }
    };
    match result {
        Ok(Some(text)) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
