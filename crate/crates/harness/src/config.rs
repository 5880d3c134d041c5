//! Experiment description, read from TOML. Every table rejects unknown keys.

use std::path::Path;

use gridvbi_core::apps::{ChannelScenario, LocalizationScenario};
use gridvbi_core::mm::{IfslaParams, MmParams};
use gridvbi_core::priors::{GammaParams, ThreeLayerPrior};
use gridvbi_core::turbo::{MrfPrior, TurboParams};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Channel,
    Localization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Sla,
    Ifsla,
    TurboIfsla,
    FixedGridBaseline,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Sla => "sla",
            Algo::Ifsla => "ifsla",
            Algo::TurboIfsla => "turbo-ifsla",
            Algo::FixedGridBaseline => "fixed-grid-baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepVar {
    #[serde(rename = "snr_db")]
    SnrDb,
    #[serde(rename = "pilots")]
    Pilots,
    #[serde(rename = "rf_chains")]
    RfChains,
    #[serde(rename = "local_iters_T")]
    LocalIters,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::SnrDb => "snr_db",
            SweepVar::Pilots => "pilots",
            SweepVar::RfChains => "rf_chains",
            SweepVar::LocalIters => "local_iters_T",
        }
    }

    fn is_count(self) -> bool {
        !matches!(self, SweepVar::SnrDb)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub antennas: usize,
    pub pilots: usize,
    pub grid_size: usize,
    pub paths: usize,
    pub snr_db: f64,
    pub off_grid: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let d = ChannelScenario::default();
        Self { antennas: d.antennas, pilots: d.pilots, grid_size: d.grid_size, paths: d.paths, snr_db: d.snr_db, off_grid: d.off_grid }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationSection {
    pub antennas: usize,
    pub rf_chains: usize,
    pub subcarriers: usize,
    pub subcarrier_interval_hz: f64,
    pub pilot_stride: usize,
    pub targets: usize,
    pub angle_bins: usize,
    pub distance_bins: usize,
    pub min_range_m: f64,
    pub max_range_m: f64,
    pub max_angle_deg: f64,
    pub cluster_radius_m: f64,
    pub snr_db: f64,
    pub detect_threshold: f64,
    /// Error charged when nothing is detected; the sector diameter if absent.
    pub penalty_m: Option<f64>,
}

impl Default for LocalizationSection {
    fn default() -> Self {
        let d = LocalizationScenario::default();
        Self {
            antennas: d.antennas,
            rf_chains: d.rf_chains,
            subcarriers: d.subcarriers,
            subcarrier_interval_hz: d.subcarrier_interval,
            pilot_stride: d.pilot_stride,
            targets: d.targets,
            angle_bins: d.angle_bins,
            distance_bins: d.distance_bins,
            min_range_m: d.min_range,
            max_range_m: d.max_range,
            max_angle_deg: d.max_angle.to_degrees(),
            cluster_radius_m: d.cluster_radius,
            snr_db: d.snr_db,
            detect_threshold: 0.5,
            penalty_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    /// `I`, stage 1 plus stage 2.
    pub total_iters: usize,
    /// `I₁`.
    pub stage1_iters: usize,
    pub tol: f64,
    /// `T` for both the signal and the grid subproblems.
    pub local_iters: usize,
    /// Schedule growth `c` for both subproblems.
    pub growth: f64,
    pub stop_tol: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let mm = MmParams::default();
        Self { total_iters: 50, stage1_iters: 10, tol: 1e-4, local_iters: mm.max_local_iters, growth: mm.growth, stop_tol: mm.stop_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    pub active_shape: f64,
    pub active_rate: f64,
    pub inactive_shape: f64,
    pub inactive_rate: f64,
    pub noise_shape: f64,
    pub noise_rate: f64,
    pub support_prob: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        Self { active_shape: 1.0, active_rate: 1.0, inactive_shape: 1.0, inactive_rate: 1e-5, noise_shape: 1e-6, noise_rate: 1e-6, support_prob: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurboSection {
    pub alpha: f64,
    pub beta: f64,
    pub inner_iters: usize,
    pub rounds: usize,
    pub sweeps: usize,
    /// Lattice shape for the channel scenario; localization uses its bins.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
}

impl Default for TurboSection {
    fn default() -> Self {
        let t = TurboParams::default();
        Self { alpha: 0.3, beta: 0.5, inner_iters: t.inner_iters, rounds: t.rounds, sweeps: t.sweeps, rows: None, cols: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub algo: Algo,
    pub trials: usize,
    pub seed: u64,
    /// Write measured wall times; off gives byte-reproducible CSVs.
    #[serde(default = "yes")]
    pub timing: bool,
    pub sweep: Sweep,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub localization: LocalizationSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub prior: PriorSection,
    #[serde(default)]
    pub turbo: TurboSection,
}

fn yes() -> bool {
    true
}

/// Everything one trial needs once a sweep value has been applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Channel(ChannelScenario),
    Localization { scn: LocalizationScenario, threshold: f64, penalty: f64 },
}

impl Scenario {
    pub fn columns(&self) -> usize {
        match self {
            Scenario::Channel(c) => c.grid_size,
            Scenario::Localization { scn, .. } => scn.grid_size(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let v = &self.sweep.values;
        if v.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if v.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.sweep.var.is_count() && v.iter().any(|x| !(x.fract() == 0.0 && *x >= 1.0)) {
            return bad(format!("{} takes positive integers", self.sweep.var.name()));
        }
        match (self.sweep.var, self.scenario) {
            (SweepVar::Pilots, ScenarioKind::Localization) => return bad("pilots applies to the channel scenario".into()),
            (SweepVar::RfChains, ScenarioKind::Channel) => return bad("rf_chains applies to the localization scenario".into()),
            (SweepVar::LocalIters, _) if !matches!(self.algo, Algo::Ifsla | Algo::TurboIfsla) => {
                return bad("local_iters_T only affects the inverse-free algorithms".into())
            }
            _ => {}
        }
        let e = &self.estimator;
        if e.stage1_iters == 0 || e.stage1_iters >= e.total_iters {
            return bad("need 0 < stage1_iters < total_iters".into());
        }
        if self.algo == Algo::TurboIfsla {
            let t = &self.turbo;
            if t.inner_iters * t.rounds != e.total_iters - e.stage1_iters {
                return bad(format!(
                    "turbo needs inner_iters·rounds = total_iters − stage1_iters ({}·{} ≠ {})",
                    t.inner_iters,
                    t.rounds,
                    e.total_iters - e.stage1_iters
                ));
            }
            if self.scenario == ScenarioKind::Channel && (t.rows.is_none() || t.cols.is_none()) {
                return bad("turbo on the channel scenario needs turbo.rows and turbo.cols".into());
            }
        }
        for k in 0..v.len() {
            let scn = self.scenario_at(k)?;
            self.slas(&scn)?;
            if !self.prior(scn.columns())?.is_well_separated() {
                log::warn!("inactive precision mean is not ≫ the active one; support detection may fail");
            }
            if self.algo == Algo::TurboIfsla {
                self.mrf(&scn)?;
            }
        }
        self.ifsla_params_at(0)?;
        Ok(())
    }

    pub fn sweep_value(&self, k: usize) -> f64 {
        self.sweep.values[k]
    }

    pub fn scenario_at(&self, k: usize) -> Result<Scenario, HarnessError> {
        let value = self.sweep_value(k);
        let count = value as usize;
        let scn = match self.scenario {
            ScenarioKind::Channel => {
                let c = &self.channel;
                let mut s = ChannelScenario { antennas: c.antennas, pilots: c.pilots, grid_size: c.grid_size, paths: c.paths, snr_db: c.snr_db, off_grid: c.off_grid };
                match self.sweep.var {
                    SweepVar::SnrDb => s.snr_db = value,
                    SweepVar::Pilots => s.pilots = count,
                    _ => {}
                }
                s.validate().map_err(core_config)?;
                Scenario::Channel(s)
            }
            ScenarioKind::Localization => {
                let l = &self.localization;
                let mut s = LocalizationScenario {
                    antennas: l.antennas,
                    rf_chains: l.rf_chains,
                    subcarriers: l.subcarriers,
                    subcarrier_interval: l.subcarrier_interval_hz,
                    pilot_stride: l.pilot_stride,
                    targets: l.targets,
                    angle_bins: l.angle_bins,
                    distance_bins: l.distance_bins,
                    min_range: l.min_range_m,
                    max_range: l.max_range_m,
                    max_angle: l.max_angle_deg.to_radians(),
                    cluster_radius: l.cluster_radius_m,
                    snr_db: l.snr_db,
                };
                match self.sweep.var {
                    SweepVar::SnrDb => s.snr_db = value,
                    SweepVar::RfChains => s.rf_chains = count,
                    _ => {}
                }
                s.validate().map_err(core_config)?;
                if !(l.detect_threshold > 0.0 && l.detect_threshold < 1.0) {
                    return Err(HarnessError::Config("detect_threshold must lie in (0, 1)".into()));
                }
                let penalty = l.penalty_m.unwrap_or_else(|| s.diameter());
                if !(penalty >= 0.0) {
                    return Err(HarnessError::Config("penalty_m must be non-negative".into()));
                }
                Scenario::Localization { scn: s, threshold: l.detect_threshold, penalty }
            }
        };
        Ok(scn)
    }

    pub fn prior(&self, n: usize) -> Result<ThreeLayerPrior, HarnessError> {
        let p = &self.prior;
        let g = |a, b| GammaParams::new(a, b).map_err(core_config);
        ThreeLayerPrior::uniform(n, g(p.active_shape, p.active_rate)?, g(p.inactive_shape, p.inactive_rate)?, p.support_prob, g(p.noise_shape, p.noise_rate)?)
            .map_err(core_config)
    }

    /// Stage budgets and tolerance; the grid prior is built per scenario.
    pub fn slas(&self, scn: &Scenario) -> Result<gridvbi_core::vbi::SlaConfig, HarnessError> {
        use gridvbi_core::priors::GridPrior;
        let grid = match scn {
            Scenario::Channel(c) => GridPrior::from_spacing(vec![c.initial_grid()]),
            Scenario::Localization { scn, .. } => {
                let (iota, theta) = scn.initial_grid();
                GridPrior::from_spacing(vec![iota, theta])
            }
        }
        .map_err(core_config)?;
        let mut cfg = gridvbi_core::vbi::SlaConfig::new(grid);
        cfg.stage1_iters = self.estimator.stage1_iters;
        cfg.stage2_iters = self.estimator.total_iters - self.estimator.stage1_iters;
        cfg.convergence_tol = self.estimator.tol;
        cfg.validate().map_err(core_config)?;
        Ok(cfg)
    }

    pub fn ifsla_params_at(&self, k: usize) -> Result<IfslaParams, HarnessError> {
        let e = &self.estimator;
        let t = if self.sweep.var == SweepVar::LocalIters { self.sweep_value(k) as usize } else { e.local_iters };
        let mm = MmParams { growth: e.growth, max_local_iters: t, stop_tol: e.stop_tol };
        mm.validate().map_err(core_config)?;
        Ok(IfslaParams { x: mm, theta: mm })
    }

    pub fn mrf(&self, scn: &Scenario) -> Result<MrfPrior, HarnessError> {
        let t = &self.turbo;
        let (rows, cols) = match scn {
            Scenario::Localization { scn, .. } => (scn.angle_bins, scn.distance_bins),
            Scenario::Channel(_) => (t.rows.unwrap_or(0), t.cols.unwrap_or(0)),
        };
        if rows * cols != scn.columns() {
            return Err(HarnessError::Config(format!("{rows}×{cols} lattice does not cover {} grid points", scn.columns())));
        }
        MrfPrior::new(t.alpha, t.beta, rows, cols).map_err(core_config)
    }

    pub fn turbo_params(&self) -> TurboParams {
        TurboParams { inner_iters: self.turbo.inner_iters, rounds: self.turbo.rounds, sweeps: self.turbo.sweeps }
    }
}

fn core_config(e: gridvbi_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}
