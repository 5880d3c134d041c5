use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridvbi::{aggregate, run_exit_code, run_experiment, write_outputs, ExperimentConfig, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "gridvbi", version, about = "Monte-Carlo sweeps for the dynamic-grid VBI estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a config and write CSVs into `--out`.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-iteration traces.
        #[arg(long)]
        trace: bool,
        /// Worker threads (default: all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                let cells = cfg.sweep.values.len();
                println!("{}: {} {} trials × {cells} values of {}", config.display(), cfg.algo.name(), cfg.trials, cfg.sweep.var.name());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Run { config, out, trace, workers } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let results = match run_experiment(&cfg, &RunOptions { trace, workers }) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if let Err(e) = write_outputs(&cfg, &results, &out, trace) {
                return fail(e);
            }
            for s in aggregate(&results) {
                println!(
                    "{} = {:>8}: mean {:.4e} ({:.2} dB) ± {:.2e}, {} failed",
                    cfg.sweep.var.name(),
                    s.sweep_value,
                    s.mean,
                    s.mean_db,
                    s.std_err,
                    s.failures
                );
            }
            ExitCode::from(run_exit_code(&results))
        }
    }
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("gridvbi: {e}");
    ExitCode::from(1)
}
