//! Batch front door: JSON scenario configs in, JSON + CSV reports out.
//!
//! Exit status: 0 when every task completed (verdict content does not
//! affect it), 2 on config errors, 3 when a numeric guard stopped a
//! task.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "riqmc", version, about = "Repeated-interaction quantum Markov chain laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all tasks of a scenario config.
    Run {
        config: PathBuf,
        /// Output directory for reports and CSV artifacts.
        #[arg(long, default_value = "riqmc-out")]
        out_dir: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for independent tasks and sweep grids.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Schema and model sanity check; no computation.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out_dir,
            seed,
            threads,
        } => {
            let bytes = match std::fs::read(&config) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("config error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let text = String::from_utf8_lossy(&bytes);
            let mut scenario = match config::parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                scenario.seed = s;
            }
            match run::execute(&scenario, &bytes, &out_dir, threads) {
                Ok(outcome) => {
                    for t in &outcome.report.tasks {
                        match &t.error {
                            None => println!(
                                "task {:02} {:<14} ok    {}",
                                t.index,
                                t.name,
                                t.verdict.as_deref().unwrap_or("")
                            ),
                            Some(e) => println!("task {:02} {:<14} FAILED {e}", t.index, t.name),
                        }
                    }
                    println!("report: {}", out_dir.join("run-report.json").display());
                    if outcome.guard_violation {
                        ExitCode::from(3)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    // model construction failures surface here
                    eprintln!("run error: {e:#}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Validate { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("config error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let scenario = match config::parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let diags = run::validate(&scenario);
            let invalid = diags.iter().any(|d| d.starts_with("invalid"));
            for d in &diags {
                println!("{d}");
            }
            if invalid {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
