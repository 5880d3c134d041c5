//! Trial execution: child seeds, one estimator run per (sweep value, trial),
//! parallel fan-out with a deterministic gather.

use std::time::Instant;

use gridvbi_core::apps::{build_channel_model, build_localization_model, channel_estimate, localization_error, nmse, ChannelModel, GroundTruth};
use gridvbi_core::linalg::CVec;
use gridvbi_core::mm::run_ifsla_vbi;
use gridvbi_core::sensing::SensingModel;
use gridvbi_core::turbo::run_turbo_ifsla_vbi;
use gridvbi_core::vbi::{run_fixed_grid, run_two_stage, Estimate, IterationEvent, Observer, Solver, VariationalState};
use rayon::prelude::*;

use crate::config::{Algo, ExperimentConfig, Scenario};
use crate::HarnessError;

/// Child seed of trial `trial` at sweep position `cell`: splitmix64 over the
/// three coordinates, so trials keep their randomness when sweep values are
/// appended.
pub fn child_seed(root: u64, cell: usize, trial: usize) -> u64 {
    let mut z = root;
    for v in [cell as u64, trial as u64] {
        z = splitmix64(z ^ splitmix64(v.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    z
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub stage: u8,
    pub rel_change_mu_x: f64,
    pub d_tilde: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub cell: usize,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// NMSE or localization error; `None` when the trial failed.
    pub metric: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub failure: Option<String>,
    pub trace: Vec<TraceRow>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.metric.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub trace: bool,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
}

/// Called on the measurements of each trial before estimation. Used to
/// inject faults in tests.
pub type MeasurementHook = dyn Fn(usize, usize, &mut CVec) + Sync;

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<TrialResult>, HarnessError> {
    run_experiment_with(cfg, opts, &|_, _, _| {})
}

pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions, hook: &MeasurementHook) -> Result<Vec<TrialResult>, HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.values.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers).build().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let mut out: Vec<TrialResult> = pool.install(|| jobs.par_iter().map(|&(c, t)| run_trial(cfg, c, t, opts.trace, hook)).collect::<Result<_, _>>())?;
    out.sort_by_key(|r| (r.cell, r.trial));
    Ok(out)
}

/// Runs one trial. Configuration problems are errors; estimator failures are
/// recorded in the result.
pub fn run_trial(cfg: &ExperimentConfig, cell: usize, trial: usize, trace: bool, hook: &MeasurementHook) -> Result<TrialResult, HarnessError> {
    let scn = cfg.scenario_at(cell)?;
    let seed = child_seed(cfg.seed, cell, trial);
    let mut result = TrialResult {
        cell,
        sweep_value: cfg.sweep_value(cell),
        trial,
        seed,
        metric: None,
        iterations: 0,
        converged: false,
        wall_time_s: 0.0,
        failure: None,
        trace: Vec::new(),
    };
    let start = Instant::now();
    let outcome = match &scn {
        Scenario::Channel(c) => {
            let mut inst = build_channel_model(c, seed).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            hook(cell, trial, &mut inst.y);
            let h = inst.truth.channel.clone().expect("channel truth");
            let metric = Metric::Channel { model: &inst.model, h: &h };
            estimate(cfg, &scn, cell, &inst.y, &inst.model, &metric, trace).map(|(e, rows)| (metric.eval(&e.state), e, rows))
        }
        Scenario::Localization { scn: l, threshold, penalty } => {
            let mut inst = build_localization_model(l, seed).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            hook(cell, trial, &mut inst.y);
            let metric = Metric::Localization { truth: &inst.truth, threshold: *threshold, penalty: *penalty };
            estimate(cfg, &scn, cell, &inst.y, &inst.model, &metric, trace).map(|(e, rows)| (metric.eval(&e.state), e, rows))
        }
    };
    result.wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((Some(m), est, rows)) => {
            result.metric = Some(m);
            result.iterations = est.iterations;
            result.converged = est.converged;
            result.trace = rows;
        }
        Ok((None, est, rows)) => {
            result.iterations = est.iterations;
            result.trace = rows;
            result.failure = Some("metric undefined".into());
        }
        Err(e) => {
            log::warn!("trial {trial} at {} = {} failed: {e}", cfg.sweep.var.name(), result.sweep_value);
            result.failure = Some(e.to_string());
        }
    }
    Ok(result)
}

enum Metric<'a> {
    Channel { model: &'a ChannelModel, h: &'a CVec },
    Localization { truth: &'a GroundTruth, threshold: f64, penalty: f64 },
}

impl Metric<'_> {
    fn eval(&self, state: &VariationalState) -> Option<f64> {
        let v = match self {
            Metric::Channel { model, h } => nmse(h, &channel_estimate(model, state)).ok()?,
            Metric::Localization { truth, threshold, penalty } => localization_error(truth, state, *threshold, *penalty).ok()?.error,
        };
        v.is_finite().then_some(v)
    }
}

struct Tracer<'a> {
    metric: &'a Metric<'a>,
    enabled: bool,
    rows: Vec<TraceRow>,
}

impl Observer for Tracer<'_> {
    fn on_iteration(&mut self, e: &IterationEvent<'_>) {
        if self.enabled {
            self.rows.push(TraceRow {
                iter: e.iteration,
                stage: e.stage,
                rel_change_mu_x: e.rel_change_mu_x,
                d_tilde: e.d_tilde,
                metric: self.metric.eval(e.state).unwrap_or(f64::NAN),
            });
        }
    }
}

fn estimate(
    cfg: &ExperimentConfig,
    scn: &Scenario,
    cell: usize,
    y: &CVec,
    model: &dyn SensingModel,
    metric: &Metric<'_>,
    trace: bool,
) -> Result<(Estimate, Vec<TraceRow>), gridvbi_core::Error> {
    let prior = cfg.prior(scn.columns()).map_err(config_to_core)?;
    let sla = cfg.slas(scn).map_err(config_to_core)?;
    let mut obs = Tracer { metric, enabled: trace, rows: Vec::new() };
    let est = match cfg.algo {
        Algo::Sla => run_two_stage(y, model, &prior, &sla, Solver::Exact, &mut obs)?,
        Algo::Ifsla => run_ifsla_vbi(y, model, &prior, &sla, &cfg.ifsla_params_at(cell).map_err(config_to_core)?, &mut obs)?,
        Algo::FixedGridBaseline => run_fixed_grid(y, model, &prior, &sla, &mut obs)?,
        Algo::TurboIfsla => {
            let mrf = cfg.mrf(scn).map_err(config_to_core)?;
            let mm = cfg.ifsla_params_at(cell).map_err(config_to_core)?;
            run_turbo_ifsla_vbi(y, model, &prior, &mrf, &sla, &mm, &cfg.turbo_params(), &mut obs)?
        }
    };
    Ok((est, obs.rows))
}

// Already validated; kept as a contract error if it ever happens.
fn config_to_core(e: HarnessError) -> gridvbi_core::Error {
    gridvbi_core::Error::Contract(e.to_string())
}
