use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use guts_search::sim::batch::{median, write_batch, Arm};
use guts_search::sim::persist::{replay, run_logged, write_run, ReplayMode};
use guts_search::sim::plot::plot_dir;
use guts_search::sim::{run_batch, ScenarioConfig};

#[derive(Parser)]
#[command(name = "guts-sim", version, about = "Multi-robot active search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write a replayable run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "run-out")]
        out: PathBuf,
    },
    /// Run every planner × channel arm plus the configured confidence sweep.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "batch-out")]
        out: PathBuf,
    },
    /// Re-run a logged trial and compare its artifacts byte for byte.
    Replay {
        /// Message log, manifest or run directory.
        #[arg(long)]
        log: PathBuf,
        /// Redraw channel losses from the seed instead of the log.
        #[arg(long)]
        reseed: bool,
    },
    /// Write SVG figures for a run or batch directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let seed = seed.unwrap_or(cfg.seed);
            let trial = run_logged(&cfg, seed)?;
            let manifest = write_run(&out, &cfg, &trial)?;
            println!(
                "seed {seed}: final coverage {:.2}%, views {:?}, {} messages -> {}",
                trial.final_team_pct().unwrap_or(0.0),
                trial.final_views(),
                trial.messages.len(),
                out.display()
            );
            if let Some(cause) = manifest.aborted {
                eprintln!("trial aborted: {cause}");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Batch { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = run_batch(&cfg)?;
            write_batch(&out, &report)?;
            for arm in Arm::ALL {
                let runs: Vec<_> = report.trials.iter().filter(|t| t.arm == arm).collect();
                let half: Vec<f64> = runs.iter().map(|t| t.pct_at_half).collect();
                let last: Vec<f64> = runs.iter().map(|t| t.final_pct).collect();
                println!(
                    "{arm:<18} trials {:>3}  median@half {:>7.2}%  median final {:>7.2}%",
                    runs.len(),
                    median(&half),
                    median(&last)
                );
            }
            for v in &report.views {
                println!("c = {:<8} mean views {:?} (total {:.2})", v.confidence, v.mean_views, v.mean_total);
            }
            println!("wrote {}", out.display());
        }
        Command::Replay { log, reseed } => {
            let mode = if reseed { ReplayMode::Reseeded } else { ReplayMode::ScriptedDrops };
            let report = replay(&log, mode)?;
            if report.identical() {
                println!("replay of seed {} in {}: identical", report.seed, report.dir.display());
            } else {
                for (file, line) in &report.first_difference {
                    println!("{file}: first difference at line {line}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Plot { input } => {
            for p in plot_dir(&input)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
