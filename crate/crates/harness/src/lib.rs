//! Seeded Monte-Carlo experiments over the channel-estimation and
//! localization scenarios.
//!
//! A run is described by an [`ExperimentConfig`] (TOML, see `docs/config.md`),
//! executed by [`run_experiment`] and written by [`write_outputs`] as
//! `results.csv`, `summary.csv` and, with tracing on, one
//! `trace_<cell>.csv` per sweep value.

pub mod config;
pub mod report;
pub mod run;

use std::path::Path;

pub use config::{Algo, ExperimentConfig, Scenario, ScenarioKind, SweepVar};
pub use report::{aggregate, Summary};
pub use run::{child_seed, run_experiment, run_experiment_with, RunOptions, TraceRow, TrialResult};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit code of a finished run: 2 if any trial failed, else 0.
pub fn run_exit_code(results: &[TrialResult]) -> u8 {
    if results.iter().any(TrialResult::failed) {
        2
    } else {
        0
    }
}

pub fn write_outputs(cfg: &ExperimentConfig, results: &[TrialResult], out: &Path, trace: bool) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("results.csv"), report::results_csv(cfg, results))?;
    std::fs::write(out.join("summary.csv"), report::summary_csv(cfg, &aggregate(results)))?;
    if trace {
        for cell in 0..cfg.sweep.values.len() {
            std::fs::write(out.join(format!("trace_{cell}.csv")), report::trace_csv(results, cell))?;
        }
    }
    Ok(())
}
