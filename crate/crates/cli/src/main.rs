//! `chids`: preprocessing, training, evaluation and detection from the
//! command line.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{Failure, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(
    name = "chids",
    version,
    about = "Hybrid intrusion detection for cluster heads"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the split and the simulated streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a configuration key, e.g. `--set features.k=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deduplicate, split, prune, select features and normalize the dataset.
    Preprocess,
    /// Train the PART decision list on the training cache.
    Train,
    /// Score the model on the test cache and write the report.
    Evaluate,
    /// Run the anomaly filter and the classifier over a record stream.
    Detect {
        /// KDD-format records, one per line.
        #[arg(long)]
        records: PathBuf,
        /// Event stream aligned with the records (record i belongs to event i).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Generate a synthetic event stream for a scenario and evaluate the rules on it.
    Simulate {
        /// benign, hello-flood, selective-forwarding, sinkhole, modification, replay, sybil or jamming.
        #[arg(long)]
        scenario: String,
    },
    /// Rebuild the report files from stored evaluation results.
    Report,
}

/// Written paths, and whether stdout is already taken by alert lines.
fn run(cli: Cli) -> Result<(Vec<PathBuf>, bool), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(error::EXIT_OTHER, e.to_string()))?;
    }
    let cfg = config::load(
        cli.config.as_deref(),
        &cli.sets,
        cli.seed,
        cli.out.as_deref(),
    )?;
    let mut stdout_taken = false;
    let paths = match cli.command {
        Command::Preprocess => commands::preprocess(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Evaluate => commands::evaluate_cmd(&cfg),
        Command::Detect { records, events } => {
            stdout_taken = matches!(cfg.pipeline.alerts.as_str(), "stdout" | "-");
            commands::detect(&cfg, &records, events.as_deref())
        }
        Command::Simulate { scenario } => commands::simulate(&cfg, &scenario),
        Command::Report => commands::report(&cfg),
    }?;
    Ok((paths, stdout_taken))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((paths, alerts_on_stdout)) => {
            // a closed pipe (e.g. `| head`) is not a failure
            let mut sink: Box<dyn Write> = if alerts_on_stdout {
                Box::new(std::io::stderr().lock())
            } else {
                Box::new(std::io::stdout().lock())
            };
            for p in paths {
                if writeln!(sink, "{}", p.display()).is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(if f.code == 0 { EXIT_CONFIG } else { f.code })
        }
    }
}
