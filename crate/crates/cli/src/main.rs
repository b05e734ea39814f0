//! The `rindler` command-line interface.
//!
//! Exit codes: 0 on success, 2 for configuration problems, 3 when any sweep
//! point failed or did not converge (partial results are still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rindler_cli::cache;
use rindler_cli::config::{Preset, ScenarioConfig};
use rindler_cli::runner::{run_scenario, RunError, RunOptions};
use rindler_cli::scenarios;

#[derive(Parser)]
#[command(
    name = "rindler",
    version,
    about = "Gaussian-channel scenarios for uniformly accelerated observers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write its CSV dataset.
    Run {
        /// Scenario config file (TOML).
        #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
        config: Option<PathBuf>,
        /// Built-in preset name (see `rindler list`).
        #[arg(long, value_name = "NAME")]
        scenario: Option<String>,
        /// Worker threads for the sweep (default: all cores).
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
        /// Disable the result cache for this run.
        #[arg(long)]
        no_cache: bool,
        /// Output directory for relative CSV paths.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List the built-in presets (and a supplied custom config).
    List {
        /// Also describe this config file.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Remove all entries from the result cache directory.
    CacheClear {
        /// Cache directory (default: config/env resolution).
        #[arg(long, value_name = "DIR")]
        cache_dir: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_FATAL: u8 = 1;

fn load_config(
    config: Option<PathBuf>,
    scenario: Option<String>,
) -> Result<ScenarioConfig, String> {
    match (config, scenario) {
        (Some(path), None) => ScenarioConfig::from_path(&path).map_err(|e| e.to_string()),
        (None, Some(name)) => {
            let preset = Preset::from_name(&name)
                .ok_or_else(|| format!("unknown scenario {name:?}; see `rindler list`"))?;
            scenarios::preset_config(preset)
                .ok_or_else(|| "the custom scenario needs --config".to_string())
        }
        (None, None) => Err("one of --config or --scenario is required".to_string()),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Run {
            config,
            scenario,
            workers,
            no_cache,
            out,
        } => {
            let cfg = match load_config(config, scenario) {
                Ok(cfg) => cfg,
                Err(message) => {
                    eprintln!("error: {message}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let opts = RunOptions {
                workers,
                no_cache,
                out_dir: out,
            };
            match run_scenario(&cfg, &opts) {
                Ok(outcome) => {
                    for w in &outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!(
                        "{}: {} rows -> {} ({} failed, {} unconverged; cache {} hits / {} misses)",
                        cfg.scenario,
                        outcome.rows,
                        outcome.csv_path.display(),
                        outcome.failed,
                        outcome.unconverged,
                        outcome.cache_hits,
                        outcome.cache_misses,
                    );
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(RunError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FATAL)
                }
            }
        }
        Command::List { config } => {
            let custom = match config {
                Some(path) => match ScenarioConfig::from_path(&path) {
                    Ok(cfg) => Some(cfg),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_CONFIG);
                    }
                },
                None => None,
            };
            print!("{}", scenarios::listing(custom.as_ref()));
            ExitCode::SUCCESS
        }
        Command::CacheClear { cache_dir } => {
            let dir = cache::resolve_dir(cache_dir.as_deref());
            match cache::clear_dir(&dir) {
                Ok(removed) => {
                    println!("removed {removed} entries from {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: cannot clear {}: {e}", dir.display());
                    ExitCode::from(EXIT_FATAL)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
