//! Mean-field coordinate updates and the two-stage successive-linearization
//! estimator built from them.

use nalgebra::Cholesky;

use crate::error::{contract, Error, Result};
use crate::linalg::{all_finite_c, diag_of_adjoint_product, hermitian_part, real_vec_finite, CMat, CVec, RMat, RVec, C64};
use crate::mm::{diag_covariance, mm_solve_observed, spectral_bound, MmParams, MmStep, QuadraticProblem};
use crate::priors::{GammaParams, GridPrior, ThreeLayerPrior};
use crate::sensing::{Grid, LinearizedModel, SensingModel};
use crate::special::{ln_gamma, sigmoid};

pub const DEFAULT_STAGE1_ITERS: usize = 10;
pub const DEFAULT_TOTAL_ITERS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Posterior covariance of `x`, full for the exact path and diagonal for the
/// inverse-free path.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    Full(CMat),
    Diagonal(RVec),
}

impl Covariance {
    pub fn zeros_diag(n: usize) -> Self {
        Covariance::Diagonal(RVec::zeros(n))
    }

    pub fn diag(&self) -> RVec {
        match self {
            Covariance::Full(s) => RVec::from_fn(s.nrows(), |i, _| s[(i, i)].re),
            Covariance::Diagonal(d) => d.clone(),
        }
    }

    /// `Tr(HΣ)` for Hermitian `H`.
    pub fn trace_with(&self, h: &CMat) -> f64 {
        match self {
            Covariance::Full(s) => h.iter().zip(s.iter()).map(|(a, b)| (a * b.conj()).re).sum(),
            Covariance::Diagonal(d) => d.iter().enumerate().map(|(i, v)| h[(i, i)].re * v).sum(),
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            Covariance::Full(s) => s.clone(),
            Covariance::Diagonal(d) => CMat::from_diagonal(&d.map(|v| C64::new(v, 0.0))),
        }
    }
}

/// All factorized posteriors and their sufficient statistics.
#[derive(Debug, Clone)]
pub struct VariationalState {
    pub mu_x: CVec,
    pub sigma_x: Covariance,
    pub rho_post: Vec<GammaParams>,
    pub support_post: RVec,
    pub gamma_post: GammaParams,
    pub theta_mean: Grid,
    pub theta_cov: Vec<RVec>,
}

impl VariationalState {
    /// `⟨|x_n|²⟩ = |μ_n|² + Σ_nn`.
    pub fn x2_mean(&self) -> RVec {
        let d = self.sigma_x.diag();
        RVec::from_fn(self.mu_x.len(), |n, _| self.mu_x[n].norm_sqr() + d[n])
    }

    pub fn rho_mean(&self) -> RVec {
        RVec::from_iterator(self.rho_post.len(), self.rho_post.iter().map(GammaParams::mean))
    }

    pub fn gamma_mean(&self) -> f64 {
        self.gamma_post.mean()
    }
}

/// Iteration budget and grid prior for the two-stage estimator.
#[derive(Debug, Clone)]
pub struct SlaConfig {
    pub stage1_iters: usize,
    pub stage2_iters: usize,
    /// Stage 2 stops once `‖Δμ_x‖/‖μ_x‖` falls below this.
    pub convergence_tol: f64,
    pub grid_prior: GridPrior,
}

impl SlaConfig {
    pub fn new(grid_prior: GridPrior) -> Self {
        Self {
            stage1_iters: DEFAULT_STAGE1_ITERS,
            stage2_iters: DEFAULT_TOTAL_ITERS - DEFAULT_STAGE1_ITERS,
            convergence_tol: DEFAULT_TOL,
            grid_prior,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stage1_iters == 0 || self.stage2_iters == 0 {
            return Err(contract("both stages need at least one iteration"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(contract("convergence tolerance must be positive"));
        }
        Ok(())
    }
}

/// `(γH_x + diag⟨ρ⟩)⁻¹` and the posterior mean of `x`.
pub fn update_x(lin: &LinearizedModel, rho_mean: &RVec, gamma_mean: f64, y: &CVec) -> Result<(CVec, CMat)> {
    let p = x_problem(lin, rho_mean, gamma_mean, y)?;
    let chol = Cholesky::new(p.w()).ok_or_else(|| Error::Numerical("x precision matrix is not positive definite".into()))?;
    let mu = chol.solve(p.b());
    let mut sigma = chol.inverse();
    hermitian_part(&mut sigma);
    Ok((mu, sigma))
}

/// The quadratic whose minimizer is the `x` posterior mean.
pub fn x_problem(lin: &LinearizedModel, rho_mean: &RVec, gamma_mean: f64, y: &CVec) -> Result<QuadraticProblem<C64>> {
    if rho_mean.len() != lin.columns() || y.len() != lin.measurements() {
        return Err(contract("x update dimensions disagree"));
    }
    if rho_mean.iter().any(|r| !(*r > 0.0)) || !(gamma_mean > 0.0) {
        return Err(contract("precisions must be positive"));
    }
    let b = lin.f_hat().ad_mul(y) * C64::new(gamma_mean, 0.0);
    QuadraticProblem::new(lin.h_x().clone(), rho_mean.clone(), b, gamma_mean)
}

pub fn update_rho(support_post: &RVec, prior: &ThreeLayerPrior, x2_mean: &RVec) -> Result<Vec<GammaParams>> {
    if support_post.len() != prior.len() || x2_mean.len() != prior.len() {
        return Err(contract("rho update dimensions disagree"));
    }
    (0..prior.len())
        .map(|n| {
            let (l, x2) = (support_post[n], x2_mean[n]);
            if !(0.0..=1.0).contains(&l) || !(x2 >= 0.0) {
                return Err(contract(format!("invalid support probability or second moment at {n}")));
            }
            let (on, off) = (prior.active()[n], prior.inactive()[n]);
            GammaParams::new(
                l * on.shape() + (1.0 - l) * off.shape() + 1.0,
                l * on.rate() + (1.0 - l) * off.rate() + x2,
            )
        })
        .collect()
}

/// `ln C` for prior `prior` evaluated at the posterior moments of `ρ`.
pub fn log_evidence_factor(prior: &GammaParams, rho_mean: f64, rho_log_mean: f64) -> Result<f64> {
    let (a, b) = (prior.shape(), prior.rate());
    Ok(a * b.ln() - ln_gamma(a)? + (a - 1.0) * rho_log_mean - b * rho_mean)
}

pub fn update_s(prior_prob: &RVec, rho_post: &[GammaParams], prior: &ThreeLayerPrior) -> Result<RVec> {
    if prior_prob.len() != rho_post.len() || rho_post.len() != prior.len() {
        return Err(contract("support update dimensions disagree"));
    }
    let mut out = RVec::zeros(prior.len());
    for n in 0..prior.len() {
        let l = prior_prob[n];
        if !(0.0..=1.0).contains(&l) {
            return Err(contract(format!("support prior {l} at {n} is outside [0, 1]")));
        }
        if l == 0.0 || l == 1.0 {
            out[n] = l;
            continue;
        }
        let (m, lm) = (rho_post[n].mean(), rho_post[n].log_mean());
        let diff = log_evidence_factor(&prior.active()[n], m, lm)? - log_evidence_factor(&prior.inactive()[n], m, lm)?;
        out[n] = sigmoid(l.ln() - (1.0 - l).ln() + diff);
    }
    Ok(out)
}

/// Posterior of the noise precision.
///
/// `d̃` is accumulated as `‖y − F̂μ‖² + Σ_n (H_x − F̂ᴴF̂)_nn|μ_n|² + Tr(H_xΣ_x)`,
/// which equals the expanded quadratic but avoids its cancellation.
pub fn update_gamma(noise: &GammaParams, lin: &LinearizedModel, mu_x: &CVec, sigma_x: &Covariance, y: &CVec) -> Result<GammaParams> {
    if mu_x.len() != lin.columns() || y.len() != lin.measurements() {
        return Err(contract("gamma update dimensions disagree"));
    }
    let residual = y - lin.f_hat() * mu_x;
    let spread: f64 = (0..lin.columns()).map(|n| (lin.h_x()[(n, n)].re - lin.gram_f()[(n, n)].re) * mu_x[n].norm_sqr()).sum();
    let d = noise.rate() + residual.norm_squared() + spread + sigma_x.trace_with(lin.h_x());
    if !(d > 0.0) {
        return Err(Error::Numerical(format!("noise posterior rate is {d}")));
    }
    GammaParams::new(noise.shape() + lin.measurements() as f64, d)
}

/// Gradient `g_θʲ` and curvature `H_θʲ` of the expected data fit at `μ̂`.
pub fn theta_statistics(lin: &LinearizedModel, block: usize, mu_x: &CVec, sigma_x: &Covariance, y: &CVec) -> (RVec, RMat) {
    let n = lin.columns();
    let a = lin.deriv(block);
    let g_a = lin.gram_deriv(block);
    let mut h = RMat::zeros(n, n);
    match sigma_x {
        Covariance::Full(s) => {
            for m in 0..n {
                for i in 0..n {
                    h[(i, m)] = 2.0 * ((mu_x[i].conj() * mu_x[m] + s[(m, i)]) * g_a[(i, m)]).re;
                }
            }
        }
        Covariance::Diagonal(d) => {
            for m in 0..n {
                for i in 0..n {
                    let mut v = mu_x[i].conj() * mu_x[m];
                    if i == m {
                        v += d[i];
                    }
                    h[(i, m)] = 2.0 * (v * g_a[(i, m)]).re;
                }
            }
        }
    }
    let ar = a.ad_mul(&(y - lin.f_hat() * mu_x));
    let corr: CVec = match sigma_x {
        Covariance::Full(s) => {
            let af = a.ad_mul(lin.f_hat());
            CVec::from_fn(n, |i, _| (0..n).map(|k| af[(i, k)] * s[(k, i)]).sum())
        }
        Covariance::Diagonal(d) => {
            let af = diag_of_adjoint_product(a, lin.f_hat());
            CVec::from_fn(n, |i, _| af[i] * d[i])
        }
    };
    let g = RVec::from_fn(n, |i, _| 2.0 * (mu_x[i].conj() * ar[i]).re - 2.0 * corr[i].re);
    (g, h)
}

/// The quadratic whose minimizer is the grid posterior mean of block `j`.
pub fn theta_problem(
    lin: &LinearizedModel,
    block: usize,
    mu_x: &CVec,
    sigma_x: &Covariance,
    gamma_mean: f64,
    grid_prior: &GridPrior,
    y: &CVec,
) -> Result<QuadraticProblem<f64>> {
    if block >= lin.blocks() || grid_prior.blocks() != lin.blocks() || grid_prior.len() != lin.columns() {
        return Err(contract("grid prior does not match the model"));
    }
    let (g, h) = theta_statistics(lin, block, mu_x, sigma_x, y);
    let kappa = grid_prior.precision(block);
    let b = (g + &h * lin.mu_hat().block(block)) * gamma_mean + grid_prior.mean(block) * kappa;
    QuadraticProblem::new(h, RVec::from_element(lin.columns(), kappa), b, gamma_mean)
}

/// Exact grid posteriors `(μ_θʲ, diag Σ_θʲ)` for every block.
pub fn update_theta(
    lin: &LinearizedModel,
    mu_x: &CVec,
    sigma_x: &Covariance,
    gamma_mean: f64,
    grid_prior: &GridPrior,
    y: &CVec,
) -> Result<Vec<(RVec, RVec)>> {
    (0..lin.blocks())
        .map(|j| {
            let p = theta_problem(lin, j, mu_x, sigma_x, gamma_mean, grid_prior, y)?;
            let chol = Cholesky::new(p.w()).ok_or_else(|| Error::Numerical("grid precision matrix is not positive definite".into()))?;
            let mean = chol.solve(p.b());
            let inv = chol.inverse();
            Ok((mean, inv.diagonal()))
        })
        .collect()
}

/// Share of `‖y‖²` attributed to the signal by the initial precisions.
pub const INITIAL_SIGNAL_FRACTION: f64 = 0.5;

/// Starting `q(ρ)` and `q(γ)`: the signal and the noise each explain their
/// share of the measured energy, `E‖F̂x‖² = f‖y‖²` and `M/⟨γ⟩ = (1−f)‖y‖²`.
/// Falls back to the prior when `y = 0`.
pub fn initial_precisions(prior: &ThreeLayerPrior, lin: &LinearizedModel, y2: f64) -> Result<(Vec<GammaParams>, GammaParams)> {
    let f = INITIAL_SIGNAL_FRACTION;
    let energy = lin.f_hat().norm_squared();
    if !(y2 > 0.0) || !(energy > 0.0) {
        let rho = (0..prior.len()).map(|i| prior.marginal_precision(i)).collect();
        return Ok((rho, GammaParams::new(1.0, 1.0)?));
    }
    let rho = GammaParams::new(1.0, f * y2 / energy)?;
    let gamma = GammaParams::new(lin.measurements() as f64, (1.0 - f) * y2)?;
    Ok((vec![rho; prior.len()], gamma))
}

/// How the two quadratic subproblems are solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    /// Dense Cholesky with full covariance.
    Exact,
    /// MM iterations with the diagonal covariance approximation.
    InverseFree { x: MmParams, theta: MmParams },
}

/// Which subproblem an MM step belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MmTarget {
    X,
    Theta(usize),
}

#[derive(Debug)]
pub enum CurvatureRef<'a> {
    Complex(&'a CMat),
    Real(&'a RMat),
}

#[derive(Debug)]
pub struct MmStepEvent<'a> {
    pub iteration: usize,
    pub target: MmTarget,
    pub t: usize,
    pub l_t: f64,
    pub phi_before: f64,
    pub phi_after: f64,
    pub curvature: CurvatureRef<'a>,
}

#[derive(Debug)]
pub struct IterationEvent<'a> {
    /// 1-based over both stages.
    pub iteration: usize,
    pub stage: u8,
    pub rel_change_mu_x: f64,
    pub d_tilde: f64,
    pub state: &'a VariationalState,
}

pub trait Observer {
    fn on_iteration(&mut self, _event: &IterationEvent<'_>) {}
    fn on_mm_step(&mut self, _event: &MmStepEvent<'_>) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// Counters for conditions that were handled but worth reporting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub mm_ascent_steps: usize,
    pub degraded_bounds: usize,
    pub clamped_messages: usize,
    pub undefined_outputs: usize,
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub state: VariationalState,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

fn rel_change(new: &CVec, old: &CVec) -> f64 {
    let diff = (new - old).norm();
    let base = old.norm();
    if diff == 0.0 {
        0.0
    } else if base == 0.0 {
        f64::INFINITY
    } else {
        diff / base
    }
}

/// `λ_max` of an MM curvature, counting Gershgorin fallbacks.
fn curvature_bound<T: nalgebra::ComplexField<RealField = f64>>(m: &nalgebra::DMatrix<T>, diagnostics: &mut Diagnostics) -> f64 {
    let b = spectral_bound(m);
    if b.degraded {
        diagnostics.degraded_bounds += 1;
    }
    b.value.max(f64::MIN_POSITIVE)
}

/// Stateful two-stage estimator; the drivers below and the turbo loop step it.
pub struct Estimator<'a> {
    y: &'a CVec,
    spec: &'a dyn SensingModel,
    prior: &'a ThreeLayerPrior,
    config: &'a SlaConfig,
    solver: Solver,
    support_prior: RVec,
    lin: LinearizedModel,
    state: VariationalState,
    l_x0: f64,
    iteration: usize,
    diagnostics: Diagnostics,
}

impl<'a> Estimator<'a> {
    pub fn new(y: &'a CVec, spec: &'a dyn SensingModel, prior: &'a ThreeLayerPrior, config: &'a SlaConfig, solver: Solver) -> Result<Self> {
        config.validate()?;
        if let Solver::InverseFree { x, theta } = solver {
            x.validate()?;
            theta.validate()?;
        }
        let (m, n) = (spec.measurements(), spec.columns());
        if y.len() != m || prior.len() != n {
            return Err(contract(format!("measurement length {} or prior length {} disagree with the {m}×{n} model", y.len(), prior.len())));
        }
        if config.grid_prior.blocks() != spec.blocks() || config.grid_prior.len() != n {
            return Err(contract("grid prior does not match the model"));
        }
        if !all_finite_c(y) {
            return Err(Error::NonFinite { iteration: 0, what: "measurements" });
        }
        let grid = Grid::new(config.grid_prior.means().to_vec())?;
        let theta_cov = vec![RVec::zeros(n); spec.blocks()];
        let lin = LinearizedModel::relinearize(spec, &grid, &theta_cov)?;
        let mut diagnostics = Diagnostics::default();
        let l_x0 = match solver {
            Solver::InverseFree { .. } => curvature_bound(lin.gram_f(), &mut diagnostics),
            Solver::Exact => 0.0,
        };
        let y2 = y.norm_squared();
        let (rho_post, gamma_post) = initial_precisions(prior, &lin, y2)?;
        let support_prior = RVec::from_column_slice(prior.support_prob());
        let state = VariationalState {
            mu_x: CVec::zeros(n),
            sigma_x: match solver {
                Solver::Exact => Covariance::Full(CMat::zeros(n, n)),
                Solver::InverseFree { .. } => Covariance::zeros_diag(n),
            },
            rho_post,
            support_post: support_prior.clone(),
            gamma_post,
            theta_mean: grid,
            theta_cov,
        };
        Ok(Self { y, spec, prior, config, solver, support_prior, lin, state, l_x0, iteration: 0, diagnostics })
    }

    pub fn state(&self) -> &VariationalState {
        &self.state
    }

    pub fn iterations(&self) -> usize {
        self.iteration
    }

    pub fn diagnostics_mut(&mut self) -> &mut Diagnostics {
        &mut self.diagnostics
    }

    pub fn support_prior(&self) -> &RVec {
        &self.support_prior
    }

    /// Replaces the `λ_n` used by the support update.
    pub fn set_support_prior(&mut self, probs: RVec) -> Result<()> {
        if probs.len() != self.support_prior.len() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(contract("support prior must be a probability vector of length N"));
        }
        self.support_prior = probs;
        Ok(())
    }

    /// One iteration with the grid pinned at its prior mean.
    pub fn stage1_iteration(&mut self, obs: &mut dyn Observer) -> Result<f64> {
        self.iteration += 1;
        let change = self.update_signal(obs)?;
        self.check_finite()?;
        self.emit(obs, 1, change);
        Ok(change)
    }

    /// Relinearize at the current grid mean, then update all five factors.
    pub fn stage2_iteration(&mut self, obs: &mut dyn Observer) -> Result<f64> {
        self.iteration += 1;
        self.lin = LinearizedModel::relinearize(self.spec, &self.state.theta_mean, &self.state.theta_cov)?;
        let change = self.update_signal(obs)?;
        self.update_grid(obs)?;
        self.check_finite()?;
        self.emit(obs, 2, change);
        Ok(change)
    }

    pub fn finish(self, converged: bool) -> Estimate {
        Estimate { state: self.state, iterations: self.iteration, converged, diagnostics: self.diagnostics }
    }

    fn emit(&self, obs: &mut dyn Observer, stage: u8, change: f64) {
        obs.on_iteration(&IterationEvent {
            iteration: self.iteration,
            stage,
            rel_change_mu_x: change,
            d_tilde: self.state.gamma_post.rate(),
            state: &self.state,
        });
    }

    fn check_finite(&self) -> Result<()> {
        let iteration = self.iteration;
        if !all_finite_c(&self.state.mu_x) {
            return Err(Error::NonFinite { iteration, what: "signal mean" });
        }
        if !real_vec_finite(&self.state.sigma_x.diag()) {
            return Err(Error::NonFinite { iteration, what: "signal covariance" });
        }
        if !self.state.theta_mean.is_finite() || !self.state.theta_cov.iter().all(real_vec_finite) {
            return Err(Error::NonFinite { iteration, what: "grid posterior" });
        }
        if !real_vec_finite(&self.state.support_post) {
            return Err(Error::NonFinite { iteration, what: "support posterior" });
        }
        Ok(())
    }

    /// Updates `q(x)`, `q(ρ)`, `q(s)` and `q(γ)`; returns the relative change of `μ_x`.
    fn update_signal(&mut self, obs: &mut dyn Observer) -> Result<f64> {
        let rho = self.state.rho_mean();
        let gamma = self.state.gamma_mean();
        let old = self.state.mu_x.clone();
        match self.solver {
            Solver::Exact => {
                let (mu, sigma) = update_x(&self.lin, &rho, gamma, self.y)?;
                self.state.mu_x = mu;
                self.state.sigma_x = Covariance::Full(sigma);
            }
            Solver::InverseFree { x, .. } => {
                let p = x_problem(&self.lin, &rho, gamma, self.y)?;
                let schedule = x.with_l0(self.l_x0)?;
                let iteration = self.iteration;
                let out = mm_solve_observed(&p, &schedule, &old, &mut |s: &MmStep<'_, C64>| {
                    obs.on_mm_step(&MmStepEvent {
                        iteration,
                        target: MmTarget::X,
                        t: s.t,
                        l_t: s.l_t,
                        phi_before: s.phi_before,
                        phi_after: s.phi_after,
                        curvature: CurvatureRef::Complex(s.problem.curvature()),
                    })
                })?;
                self.diagnostics.mm_ascent_steps += out.ascent_steps;
                self.state.sigma_x = Covariance::Diagonal(diag_covariance(&p)?);
                self.state.mu_x = out.mu;
            }
        }
        self.state.rho_post = update_rho(&self.state.support_post, self.prior, &self.state.x2_mean())?;
        self.state.support_post = update_s(&self.support_prior, &self.state.rho_post, self.prior)?;
        self.state.gamma_post = update_gamma(&self.prior.noise(), &self.lin, &self.state.mu_x, &self.state.sigma_x, self.y)?;
        Ok(rel_change(&self.state.mu_x, &old))
    }

    fn update_grid(&mut self, obs: &mut dyn Observer) -> Result<()> {
        let gamma = self.state.gamma_mean();
        let gp = &self.config.grid_prior;
        match self.solver {
            Solver::Exact => {
                let upd = update_theta(&self.lin, &self.state.mu_x, &self.state.sigma_x, gamma, gp, self.y)?;
                for (j, (mean, cov)) in upd.into_iter().enumerate() {
                    *self.state.theta_mean.block_mut(j) = mean;
                    self.state.theta_cov[j] = cov;
                }
            }
            Solver::InverseFree { theta, .. } => {
                let problems = (0..self.lin.blocks())
                    .map(|j| theta_problem(&self.lin, j, &self.state.mu_x, &self.state.sigma_x, gamma, gp, self.y))
                    .collect::<Result<Vec<_>>>()?;
                let iteration = self.iteration;
                for (j, p) in problems.iter().enumerate() {
                    let schedule = theta.with_l0(curvature_bound(p.curvature(), &mut self.diagnostics))?;
                    let warm = self.state.theta_mean.block(j).clone();
                    let out = mm_solve_observed(p, &schedule, &warm, &mut |s: &MmStep<'_, f64>| {
                        obs.on_mm_step(&MmStepEvent {
                            iteration,
                            target: MmTarget::Theta(j),
                            t: s.t,
                            l_t: s.l_t,
                            phi_before: s.phi_before,
                            phi_after: s.phi_after,
                            curvature: CurvatureRef::Real(s.problem.curvature()),
                        })
                    })?;
                    self.diagnostics.mm_ascent_steps += out.ascent_steps;
                    *self.state.theta_mean.block_mut(j) = out.mu;
                    self.state.theta_cov[j] = diag_covariance(p)?;
                }
            }
        }
        Ok(())
    }
}

/// Stage 1 for `I₁` iterations, then stage 2 for up to `I₂` iterations.
pub fn run_two_stage(
    y: &CVec,
    spec: &dyn SensingModel,
    prior: &ThreeLayerPrior,
    config: &SlaConfig,
    solver: Solver,
    obs: &mut dyn Observer,
) -> Result<Estimate> {
    let mut est = Estimator::new(y, spec, prior, config, solver)?;
    for _ in 0..config.stage1_iters {
        est.stage1_iteration(obs)?;
    }
    let mut converged = false;
    for _ in 0..config.stage2_iters {
        if est.stage2_iteration(obs)? < config.convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(est.finish(converged))
}

pub fn run_sla_vbi(y: &CVec, spec: &dyn SensingModel, prior: &ThreeLayerPrior, config: &SlaConfig) -> Result<Estimate> {
    run_two_stage(y, spec, prior, config, Solver::Exact, &mut NoObserver)
}

/// The same estimator with the grid pinned at its prior mean for all
/// `I₁ + I₂` iterations.
pub fn run_fixed_grid(
    y: &CVec,
    spec: &dyn SensingModel,
    prior: &ThreeLayerPrior,
    config: &SlaConfig,
    obs: &mut dyn Observer,
) -> Result<Estimate> {
    let mut est = Estimator::new(y, spec, prior, config, Solver::Exact)?;
    let total = config.stage1_iters + config.stage2_iters;
    let mut converged = false;
    for i in 0..total {
        let change = est.stage1_iteration(obs)?;
        if i >= config.stage1_iters && change < config.convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(est.finish(converged))
}
