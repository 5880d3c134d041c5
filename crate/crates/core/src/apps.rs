//! The two application models: downlink channel estimation with a ULA and
//! OFDM target localization on a polar grid, with their ground-truth
//! generators and metrics.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, domain, Result};
use crate::linalg::{CMat, CVec, RVec, C64};
use crate::sensing::SensingModel;
use crate::vbi::VariationalState;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `(1/√N)[1, e^{jπ sinθ}, …, e^{j(N−1)π sinθ}]ᵀ`.
pub fn ula_steering(theta: f64, n: usize) -> CVec {
    let s = PI * theta.sin();
    let norm = 1.0 / (n as f64).sqrt();
    CVec::from_fn(n, |i, _| C64::from_polar(norm, s * i as f64))
}

pub fn ula_steering_derivative(theta: f64, n: usize) -> CVec {
    let a = ula_steering(theta, n);
    let c = PI * theta.cos();
    CVec::from_fn(n, |i, _| C64::new(0.0, c * i as f64) * a[i])
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn unit_phase(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

/// Noise variance giving `‖signal‖²/(M·σ²) = 10^{snr/10}`; zero for `snr = +∞`.
pub fn noise_variance(signal: &CVec, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        signal.norm_squared() / (signal.len() as f64 * 10f64.powf(snr_db / 10.0))
    }
}

fn add_noise(rng: &mut ChaCha8Rng, signal: &CVec, var: f64) -> CVec {
    let sd = var.sqrt();
    CVec::from_fn(signal.len(), |i, _| signal[i] + complex_normal(rng) * sd)
}

/// Generated truth for one trial. `sparse_x` lives on the estimation grid:
/// entry `support[k]` carries the k-th path or target.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub sparse_x: CVec,
    pub support: Vec<usize>,
    /// Per block, the true parameter of each element of `support`.
    pub theta_true: Vec<Vec<f64>>,
    /// Channel vector `h` (channel scenario only).
    pub channel: Option<CVec>,
    /// Polar target positions `(r, θ)` (localization scenario only).
    pub positions: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub antennas: usize,
    pub pilots: usize,
    pub grid_size: usize,
    pub paths: usize,
    pub snr_db: f64,
    /// Perturb true AoDs off the grid; `false` places them on grid points.
    pub off_grid: bool,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        Self { antennas: 128, pilots: 64, grid_size: 128, paths: 3, snr_db: 10.0, off_grid: true }
    }
}

impl ChannelScenario {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.pilots == 0 || self.grid_size == 0 {
            return Err(contract("channel scenario sizes must be positive"));
        }
        if self.pilots >= self.antennas {
            return Err(contract("channel scenario needs fewer pilots than antennas"));
        }
        if self.paths == 0 || self.paths > self.grid_size {
            return Err(contract("path count must lie in 1..=grid_size"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(contract("SNR must be a number or +inf"));
        }
        Ok(())
    }

    /// Grid angles with `sin θ̄_n` at the midpoints of `Ñ` equal cells of [−1, 1].
    pub fn initial_grid(&self) -> RVec {
        let g = self.grid_size as f64;
        RVec::from_fn(self.grid_size, |n, _| (-1.0 + (2 * n + 1) as f64 / g).asin())
    }
}

/// `F(ϑ) = U·A(ϑ)` with one angle block.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pilots: CMat,
    grid_size: usize,
}

impl ChannelModel {
    pub fn new(pilots: CMat, grid_size: usize) -> Self {
        Self { pilots, grid_size }
    }

    pub fn pilots(&self) -> &CMat {
        &self.pilots
    }

    pub fn antennas(&self) -> usize {
        self.pilots.ncols()
    }

    /// `h = A(ϑ)x` for grid angles `angles`.
    pub fn channel(&self, angles: &RVec, x: &CVec) -> CVec {
        let n = self.antennas();
        let mut h = CVec::zeros(n);
        for (k, xk) in x.iter().enumerate() {
            if *xk != C64::new(0.0, 0.0) {
                h.axpy(*xk, &ula_steering(angles[k], n), C64::new(1.0, 0.0));
            }
        }
        h
    }
}

impl SensingModel for ChannelModel {
    fn measurements(&self) -> usize {
        self.pilots.nrows()
    }
    fn columns(&self) -> usize {
        self.grid_size
    }
    fn blocks(&self) -> usize {
        1
    }
    fn basis(&self, point: &[f64]) -> CVec {
        &self.pilots * ula_steering(point[0], self.antennas())
    }
    fn basis_derivative(&self, point: &[f64], _block: usize) -> CVec {
        &self.pilots * ula_steering_derivative(point[0], self.antennas())
    }
}

#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub model: ChannelModel,
    pub truth: GroundTruth,
    pub y: CVec,
    pub noise_var: f64,
}

/// Draws pilots, paths and noise from `seed`, in that order.
pub fn build_channel_model(scn: &ChannelScenario, seed: u64) -> Result<ChannelInstance> {
    scn.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m, g) = (scn.antennas, scn.pilots, scn.grid_size);
    let pilots = CMat::from_fn(m, n, |_, _| unit_phase(&mut rng));
    let grid = scn.initial_grid();
    let cell = 2.0 / g as f64;
    let mut support = rand::seq::index::sample(&mut rng, g, scn.paths).into_vec();
    support.sort_unstable();
    let angles: Vec<f64> = support
        .iter()
        .map(|&k| {
            let offset: f64 = rng.random_range(-0.5..0.5);
            let s = grid[k].sin() + if scn.off_grid { offset * cell } else { 0.0 };
            s.clamp(-1.0, 1.0).asin()
        })
        .collect();
    let gains: Vec<C64> = support.iter().map(|_| complex_normal(&mut rng)).collect();
    let mut sparse_x = CVec::zeros(g);
    let mut h = CVec::zeros(n);
    for ((&k, &a), &x) in support.iter().zip(&angles).zip(&gains) {
        sparse_x[k] = x;
        h.axpy(x, &ula_steering(a, n), C64::new(1.0, 0.0));
    }
    let clean = &pilots * &h;
    let noise_var = noise_variance(&clean, scn.snr_db);
    let y = add_noise(&mut rng, &clean, noise_var);
    let truth = GroundTruth { sparse_x, support, theta_true: vec![angles], channel: Some(h), positions: Vec::new() };
    Ok(ChannelInstance { model: ChannelModel::new(pilots, g), truth, y, noise_var })
}

/// `‖ĥ − h‖²/‖h‖²`.
pub fn nmse(h_true: &CVec, h_est: &CVec) -> Result<f64> {
    if h_true.len() != h_est.len() {
        return Err(contract("channel vectors differ in length"));
    }
    let e = h_true.norm_squared();
    if e == 0.0 {
        return Err(domain("NMSE is undefined for a zero reference"));
    }
    Ok((h_est - h_true).norm_squared() / e)
}

/// `ĥ = A(μ_ϑ)μ_x` from an estimator state on the channel model.
pub fn channel_estimate(model: &ChannelModel, state: &VariationalState) -> CVec {
    model.channel(state.theta_mean.block(0), &state.mu_x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationScenario {
    pub antennas: usize,
    pub rf_chains: usize,
    pub subcarriers: usize,
    /// Subcarrier interval `f₀` in Hz.
    pub subcarrier_interval: f64,
    pub pilot_stride: usize,
    pub targets: usize,
    /// Grid rows (angle bins); `Q = angle_bins · distance_bins`.
    pub angle_bins: usize,
    pub distance_bins: usize,
    pub min_range: f64,
    pub max_range: f64,
    /// Sensing sector is `[−max_angle, max_angle]` radians.
    pub max_angle: f64,
    pub cluster_radius: f64,
    pub snr_db: f64,
}

impl Default for LocalizationScenario {
    fn default() -> Self {
        Self {
            antennas: 64,
            rf_chains: 16,
            subcarriers: 1024,
            subcarrier_interval: 30e3,
            pilot_stride: 32,
            targets: 4,
            angle_bins: 32,
            distance_bins: 16,
            min_range: 20.0,
            max_range: 60.0,
            max_angle: PI / 6.0,
            cluster_radius: 5.0,
            snr_db: 10.0,
        }
    }
}

impl LocalizationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.rf_chains == 0 || self.rf_chains >= self.antennas {
            return Err(contract("localization needs 0 < rf_chains < antennas"));
        }
        if self.pilot_stride == 0 || self.subcarriers < self.pilot_stride {
            return Err(contract("pilot stride must lie in 1..=subcarriers"));
        }
        if self.angle_bins < 1 || self.distance_bins < 1 || self.targets == 0 || self.targets > self.grid_size() {
            return Err(contract("grid must be non-empty and hold every target"));
        }
        if !(self.subcarrier_interval > 0.0 && self.min_range >= 0.0 && self.max_range > self.min_range) {
            return Err(contract("invalid subcarrier interval or range interval"));
        }
        if !(self.max_angle > 0.0 && self.max_angle < PI / 2.0 && self.cluster_radius >= 0.0) {
            return Err(contract("invalid sector half-width or cluster radius"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(contract("SNR must be a number or +inf"));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.angle_bins * self.distance_bins
    }

    pub fn pilot_count(&self) -> usize {
        self.subcarriers / self.pilot_stride
    }

    fn bin_centres(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        let w = (hi - lo) / bins as f64;
        (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect()
    }

    /// Initial grid `(ι, ϑ)`, row-major with rows indexed by angle.
    pub fn initial_grid(&self) -> (RVec, RVec) {
        let ang = Self::bin_centres(-self.max_angle, self.max_angle, self.angle_bins);
        let dist = Self::bin_centres(self.min_range, self.max_range, self.distance_bins);
        let q = self.grid_size();
        let iota = RVec::from_fn(q, |i, _| dist[i % self.distance_bins]);
        let theta = RVec::from_fn(q, |i, _| ang[i / self.distance_bins]);
        (iota, theta)
    }

    pub fn contains(&self, r: f64, theta: f64) -> bool {
        (self.min_range..=self.max_range).contains(&r) && theta.abs() <= self.max_angle
    }

    /// Largest distance between two points of the sensing sector.
    pub fn diameter(&self) -> f64 {
        let samples = 64;
        let mut pts = Vec::with_capacity(4 * samples);
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            let a = -self.max_angle + 2.0 * self.max_angle * t;
            let r = self.min_range + (self.max_range - self.min_range) * t;
            pts.push(polar_to_cartesian(self.max_range, a));
            pts.push(polar_to_cartesian(self.min_range, a));
            pts.push(polar_to_cartesian(r, self.max_angle));
            pts.push(polar_to_cartesian(r, -self.max_angle));
        }
        let mut d: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                d = d.max(((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt());
            }
        }
        d
    }
}

/// Stacked echoes `[W_RF B_n x]_{n ∈ 𝒩_b}` with blocks (distance, angle).
#[derive(Debug, Clone)]
pub struct LocalizationModel {
    w_rf: CMat,
    probes: Vec<CVec>,
    /// `(n−1)·f₀` for each pilot subcarrier.
    offsets: Vec<f64>,
    grid_size: usize,
}

impl LocalizationModel {
    pub fn new(w_rf: CMat, probes: Vec<CVec>, offsets: Vec<f64>, grid_size: usize) -> Result<Self> {
        if probes.len() != offsets.len() || probes.iter().any(|u| u.len() != w_rf.ncols()) {
            return Err(contract("probe signals must match the combiner and the offsets"));
        }
        Ok(Self { w_rf, probes, offsets, grid_size })
    }

    pub fn w_rf(&self) -> &CMat {
        &self.w_rf
    }

    fn delay_phase(&self, k: usize, iota: f64) -> C64 {
        C64::from_polar(1.0, -2.0 * PI * self.offsets[k] * 2.0 * iota / SPEED_OF_LIGHT)
    }

    fn rf_dim(&self) -> usize {
        self.w_rf.nrows()
    }
}

impl SensingModel for LocalizationModel {
    fn measurements(&self) -> usize {
        self.rf_dim() * self.probes.len()
    }
    fn columns(&self) -> usize {
        self.grid_size
    }
    fn blocks(&self) -> usize {
        2
    }
    fn basis(&self, point: &[f64]) -> CVec {
        self.basis_with_derivatives(point).0
    }
    fn basis_derivative(&self, point: &[f64], block: usize) -> CVec {
        self.basis_with_derivatives(point).1.swap_remove(block)
    }

    fn basis_with_derivatives(&self, point: &[f64]) -> (CVec, Vec<CVec>) {
        let (iota, theta) = (point[0], point[1]);
        let n = self.w_rf.ncols();
        let r = self.rf_dim();
        let a = ula_steering(theta, n);
        let da = ula_steering_derivative(theta, n);
        let v = &self.w_rf * &a;
        let dv = &self.w_rf * &da;
        let m = self.measurements();
        let (mut phi, mut d_iota, mut d_theta) = (CVec::zeros(m), CVec::zeros(m), CVec::zeros(m));
        for (k, u) in self.probes.iter().enumerate() {
            let p = self.delay_phase(k, iota);
            let s = a.dot(u);
            let ds = da.dot(u);
            let dp = C64::new(0.0, -2.0 * PI * self.offsets[k] * 2.0 / SPEED_OF_LIGHT);
            for i in 0..r {
                let e = p * s * v[i];
                phi[k * r + i] = e;
                d_iota[k * r + i] = dp * e;
                d_theta[k * r + i] = p * (ds * v[i] + s * dv[i]);
            }
        }
        (phi, vec![d_iota, d_theta])
    }
}

#[derive(Debug, Clone)]
pub struct LocalizationInstance {
    pub model: LocalizationModel,
    pub truth: GroundTruth,
    pub y: CVec,
    pub noise_var: f64,
}

/// First `rows` rows of a Haar-like random unitary (QR of a Gaussian matrix).
pub fn partial_unitary(rng: &mut ChaCha8Rng, rows: usize, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_normal(rng));
    let q = g.qr().q();
    q.rows(0, rows).into_owned()
}

pub fn polar_to_cartesian(r: f64, theta: f64) -> (f64, f64) {
    (r * theta.cos(), r * theta.sin())
}

pub fn cartesian_to_polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn draw_cluster(rng: &mut ChaCha8Rng, scn: &LocalizationScenario) -> Vec<(f64, f64)> {
    let centre = polar_to_cartesian(
        rng.random_range(scn.min_range..=scn.max_range),
        rng.random_range(-scn.max_angle..=scn.max_angle),
    );
    let mut out = Vec::with_capacity(scn.targets);
    while out.len() < scn.targets {
        let rad = scn.cluster_radius * rng.random_range(0.0f64..1.0).sqrt();
        let ang = rng.random_range(0.0..2.0 * PI);
        let (r, t) = cartesian_to_polar(centre.0 + rad * ang.cos(), centre.1 + rad * ang.sin());
        if scn.contains(r, t) {
            out.push((r, t));
        }
    }
    out
}

/// Greedy assignment of targets to distinct nearest grid points.
fn nearest_grid_points(iota: &RVec, theta: &RVec, targets: &[(f64, f64)]) -> Vec<usize> {
    let mut taken = vec![false; iota.len()];
    targets
        .iter()
        .map(|&(r, t)| {
            let (x, y) = polar_to_cartesian(r, t);
            let mut best = (f64::INFINITY, 0);
            for q in 0..iota.len() {
                if taken[q] {
                    continue;
                }
                let (gx, gy) = polar_to_cartesian(iota[q], theta[q]);
                let d = (gx - x).hypot(gy - y);
                if d < best.0 {
                    best = (d, q);
                }
            }
            taken[best.1] = true;
            best.1
        })
        .collect()
}

/// Draws combiner, probes, target cluster, reflection coefficients and noise
/// from `seed`, in that order. The echo is generated at the true positions.
pub fn build_localization_model(scn: &LocalizationScenario, seed: u64) -> Result<LocalizationInstance> {
    scn.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scn.antennas;
    let w_rf = partial_unitary(&mut rng, scn.rf_chains, n);
    let pilots = scn.pilot_count();
    let probes: Vec<CVec> = (0..pilots).map(|_| CVec::from_fn(n, |_, _| unit_phase(&mut rng))).collect();
    let offsets: Vec<f64> = (0..pilots).map(|k| (k * scn.pilot_stride) as f64 * scn.subcarrier_interval).collect();
    let q = scn.grid_size();
    let model = LocalizationModel::new(w_rf, probes, offsets, q)?;

    let positions = draw_cluster(&mut rng, scn);
    let gains: Vec<C64> = positions.iter().map(|_| complex_normal(&mut rng)).collect();
    let mut clean = CVec::zeros(model.measurements());
    for (&(r, t), &x) in positions.iter().zip(&gains) {
        clean.axpy(x, &model.basis(&[r, t]), C64::new(1.0, 0.0));
    }
    let noise_var = noise_variance(&clean, scn.snr_db);
    let y = add_noise(&mut rng, &clean, noise_var);

    let (iota, theta) = scn.initial_grid();
    let support = nearest_grid_points(&iota, &theta, &positions);
    let mut sparse_x = CVec::zeros(q);
    for (&k, &x) in support.iter().zip(&gains) {
        sparse_x[k] = x;
    }
    let truth = GroundTruth {
        sparse_x,
        support,
        theta_true: vec![positions.iter().map(|p| p.0).collect(), positions.iter().map(|p| p.1).collect()],
        channel: None,
        positions,
    };
    Ok(LocalizationInstance { model, truth, y, noise_var })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationOutcome {
    pub error: f64,
    /// No grid point cleared the threshold; `error` is the penalty.
    pub empty: bool,
}

/// Mean distance from each true target to its matched detection.
///
/// Target–detection pairs are matched greedily by increasing distance, one
/// to one. Targets left over when detections run out take the distance to
/// their nearest detection.
pub fn localization_error_points(targets: &[(f64, f64)], detected: &[(f64, f64)], penalty: f64) -> LocalizationOutcome {
    if targets.is_empty() {
        return LocalizationOutcome { error: 0.0, empty: detected.is_empty() };
    }
    if detected.is_empty() {
        return LocalizationOutcome { error: penalty, empty: true };
    }
    let cart = |p: &(f64, f64)| polar_to_cartesian(p.0, p.1);
    let t: Vec<_> = targets.iter().map(cart).collect();
    let d: Vec<_> = detected.iter().map(cart).collect();
    let dist = |i: usize, j: usize| (t[i].0 - d[j].0).hypot(t[i].1 - d[j].1);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(t.len() * d.len());
    for i in 0..t.len() {
        for j in 0..d.len() {
            pairs.push((dist(i, j), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut cost = vec![None; t.len()];
    let mut used = vec![false; d.len()];
    for (c, i, j) in pairs {
        if cost[i].is_none() && !used[j] {
            cost[i] = Some(c);
            used[j] = true;
        }
    }
    let total: f64 = (0..t.len())
        .map(|i| cost[i].unwrap_or_else(|| (0..d.len()).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min)))
        .sum();
    LocalizationOutcome { error: total / t.len() as f64, empty: false }
}

/// Localization error of an estimator state: detections are grid points with
/// `λ̃_q > threshold` at their refined coordinates `(μ_ι,q, μ_ϑ,q)`.
pub fn localization_error(truth: &GroundTruth, state: &VariationalState, threshold: f64, penalty: f64) -> Result<LocalizationOutcome> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(contract("detection threshold must lie in (0, 1)"));
    }
    if state.theta_mean.num_blocks() != 2 {
        return Err(contract("localization needs distance and angle blocks"));
    }
    let detected: Vec<(f64, f64)> = (0..state.support_post.len())
        .filter(|&q| state.support_post[q] > threshold)
        .map(|q| (state.theta_mean.block(0)[q], state.theta_mean.block(1)[q]))
        .collect();
    Ok(localization_error_points(&truth.positions, &detected, penalty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_examples() {
        let a = ula_steering(0.0, 5);
        assert!(a.iter().all(|z| (z - C64::new(1.0 / 5f64.sqrt(), 0.0)).norm() < 1e-15));
        let a = ula_steering(PI / 6.0, 4);
        for (n, z) in a.iter().enumerate() {
            let ph = n as f64 * PI / 2.0;
            assert!((z - C64::new(ph.cos(), ph.sin()) * 0.5).norm() < 1e-14);
        }
        assert!((ula_steering(1.234, 17).norm() - 1.0).abs() < 1e-14);
        assert!(ula_steering_derivative(PI / 2.0, 6).norm() < 1e-14);
        assert_eq!(ula_steering_derivative(0.4, 1).norm(), 0.0);
    }

    #[test]
    fn nmse_examples() {
        let h = CVec::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.0)]);
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert_eq!(nmse(&h, &CVec::zeros(2)).unwrap(), 1.0);
        assert!((nmse(&h, &(&h * C64::new(2.0, 0.0))).unwrap() - 1.0).abs() < 1e-15);
        assert!(nmse(&CVec::zeros(2), &h).is_err());
    }

    #[test]
    fn localization_metric_examples() {
        let t = [(30.0, 0.1)];
        assert_eq!(localization_error_points(&t, &t, 99.0).error, 0.0);
        let (x, y) = polar_to_cartesian(30.0, 0.1);
        let off = cartesian_to_polar(x + 1.0, y);
        assert!((localization_error_points(&t, &[off], 99.0).error - 1.0).abs() < 1e-12);
        let e = localization_error_points(&t, &[], 99.0);
        assert!(e.empty && e.error == 99.0);
    }

    #[test]
    fn polar_round_trip() {
        for &(r, t) in &[(1.0, 0.3), (50.0, -1.2), (0.01, 3.0)] {
            let (x, y) = polar_to_cartesian(r, t);
            let (r2, t2) = cartesian_to_polar(x, y);
            assert!((r - r2).abs() < 1e-12 && (t - t2).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_delay_phase_is_one() {
        let scn = LocalizationScenario { antennas: 8, rf_chains: 2, subcarriers: 64, pilot_stride: 16, angle_bins: 2, distance_bins: 2, targets: 1, ..Default::default() };
        let inst = build_localization_model(&scn, 1).unwrap();
        for k in 0..4 {
            assert_eq!(inst.model.delay_phase(k, 0.0), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn sector_diameter() {
        let scn = LocalizationScenario { min_range: 20.0, max_range: 60.0, max_angle: PI / 6.0, ..Default::default() };
        let chord = 2.0 * 60.0 * (PI / 6.0).sin();
        assert!((scn.diameter() - chord).abs() < 1e-9);
    }
}
