//! Summary statistics and the CSV writers.

use std::fmt::Write as _;

use crate::config::{ExperimentConfig, ScenarioKind};
use crate::run::TrialResult;

pub const RESULTS_HEADER: &str = "sweep_var,sweep_value,trial,seed,algo,metric,metric_db,iterations,converged,wall_time_s";
pub const TRACE_HEADER: &str = "trial,iter,stage,rel_change_mu_x,d_tilde,metric_snapshot";
pub const SUMMARY_HEADER: &str = "sweep_var,sweep_value,algo,trials,failures,mean,median,std_err,mean_db,mean_wall_time_s,all_failed";

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cell: usize,
    pub sweep_value: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation over `√n`; NaN below two successes.
    pub std_err: f64,
    pub mean_db: f64,
    pub mean_wall_time_s: f64,
    pub all_failed: bool,
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// One row per sweep value, in sweep order. Failed trials are counted but
/// excluded from the statistics.
pub fn aggregate(results: &[TrialResult]) -> Vec<Summary> {
    let mut cells: Vec<usize> = results.iter().map(|r| r.cell).collect();
    cells.sort_unstable();
    cells.dedup();
    cells
        .into_iter()
        .map(|cell| {
            let rs: Vec<&TrialResult> = results.iter().filter(|r| r.cell == cell).collect();
            let mut ok: Vec<f64> = rs.iter().filter_map(|r| r.metric).collect();
            let n = ok.len();
            let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std_err = if n > 1 { (ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt() } else { f64::NAN };
            ok.sort_by(f64::total_cmp);
            let median = match n {
                0 => f64::NAN,
                _ if n % 2 == 1 => ok[n / 2],
                _ => 0.5 * (ok[n / 2 - 1] + ok[n / 2]),
            };
            Summary {
                cell,
                sweep_value: rs[0].sweep_value,
                trials: rs.len(),
                failures: rs.len() - n,
                mean,
                median,
                std_err,
                mean_db: to_db(mean),
                mean_wall_time_s: rs.iter().map(|r| r.wall_time_s).sum::<f64>() / rs.len() as f64,
                all_failed: n == 0,
            }
        })
        .collect()
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn db_column(cfg: &ExperimentConfig, v: Option<f64>) -> String {
    match (cfg.scenario, v) {
        (ScenarioKind::Channel, Some(v)) => fmt_f64(to_db(v)),
        _ => String::new(),
    }
}

pub fn results_csv(cfg: &ExperimentConfig, results: &[TrialResult]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in results {
        let wall = if cfg.timing { fmt_f64(r.wall_time_s) } else { fmt_f64(0.0) };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            cfg.sweep.var.name(),
            fmt_f64(r.sweep_value),
            r.trial,
            r.seed,
            cfg.algo.name(),
            r.metric.map_or_else(|| "NaN".into(), fmt_f64),
            db_column(cfg, r.metric),
            r.iterations,
            r.converged,
            wall
        );
    }
    s
}

pub fn summary_csv(cfg: &ExperimentConfig, rows: &[Summary]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let mean_db = if cfg.scenario == ScenarioKind::Channel { fmt_f64(r.mean_db) } else { String::new() };
        let wall = if cfg.timing { fmt_f64(r.mean_wall_time_s) } else { fmt_f64(0.0) };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cfg.sweep.var.name(),
            fmt_f64(r.sweep_value),
            cfg.algo.name(),
            r.trials,
            r.failures,
            fmt_f64(r.mean),
            fmt_f64(r.median),
            fmt_f64(r.std_err),
            mean_db,
            wall,
            r.all_failed
        );
    }
    s
}

/// Trace rows of the trials in one sweep cell.
pub fn trace_csv(results: &[TrialResult], cell: usize) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in results.iter().filter(|r| r.cell == cell) {
        for t in &r.trace {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.trial, t.iter, t.stage, fmt_f64(t.rel_change_mu_x), fmt_f64(t.d_tilde), fmt_f64(t.metric));
        }
    }
    s
}
