//! Inverse-free quadratic minimization by majorization-minimization.
//!
//! Each step replaces `φ(μ) = Re(μᴴWμ) − 2Re(μᴴb)` by a separable
//! surrogate whose curvature is `scale·L·I + diag(reg)`, so the minimizer is
//! an elementwise division after one matrix-vector product.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{contract, Result};
use crate::linalg::{max_abs_row_sum, CVec, RVec};
use crate::priors::ThreeLayerPrior;
use crate::sensing::SensingModel;
use crate::vbi::{run_two_stage, Estimate, Observer, SlaConfig, Solver};

pub const DEFAULT_GROWTH: f64 = 0.05;
pub const DEFAULT_STOP_TOL: f64 = 1e-6;
pub const DEFAULT_LOCAL_ITERS: usize = 10;

/// Step and stopping parameters shared by every subproblem of one kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmParams {
    pub growth: f64,
    pub max_local_iters: usize,
    pub stop_tol: f64,
}

impl Default for MmParams {
    fn default() -> Self {
        Self { growth: DEFAULT_GROWTH, max_local_iters: DEFAULT_LOCAL_ITERS, stop_tol: DEFAULT_STOP_TOL }
    }
}

impl MmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth > 0.0 && self.growth <= 0.1) {
            return Err(contract(format!("schedule growth {} is outside (0, 0.1]", self.growth)));
        }
        if self.max_local_iters == 0 {
            return Err(contract("at least one local MM iteration is required"));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(contract("stop tolerance must be non-negative"));
        }
        Ok(())
    }

    pub fn with_l0(&self, l0: f64) -> Result<MmSchedule> {
        MmSchedule::new(l0, self.growth, self.max_local_iters, self.stop_tol)
    }
}

/// Geometric curvature schedule `L(t) = L0·(1+c)ᵗ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmSchedule {
    l0: f64,
    params: MmParams,
}

impl MmSchedule {
    pub fn new(l0: f64, growth: f64, max_local_iters: usize, stop_tol: f64) -> Result<Self> {
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(contract(format!("initial curvature bound must be positive, got {l0}")));
        }
        let params = MmParams { growth, max_local_iters, stop_tol };
        params.validate()?;
        Ok(Self { l0, params })
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn growth(&self) -> f64 {
        self.params.growth
    }

    pub fn max_local_iters(&self) -> usize {
        self.params.max_local_iters
    }

    pub fn stop_tol(&self) -> f64 {
        self.params.stop_tol
    }

    pub fn l_at(&self, t: usize) -> f64 {
        self.l0 * (1.0 + self.params.growth).powi(t as i32)
    }
}

/// `min_μ Re(μᴴWμ) − 2Re(μᴴb)` with `W = scale·curvature + diag(reg)`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem<T: ComplexField<RealField = f64>> {
    curvature: DMatrix<T>,
    reg: RVec,
    b: DVector<T>,
    scale: f64,
}

impl<T: ComplexField<RealField = f64>> QuadraticProblem<T> {
    pub fn new(curvature: DMatrix<T>, reg: RVec, b: DVector<T>, scale: f64) -> Result<Self> {
        let n = b.len();
        if curvature.shape() != (n, n) || reg.len() != n {
            return Err(contract("quadratic problem dimensions disagree"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(contract(format!("scale must be positive, got {scale}")));
        }
        if reg.iter().any(|r| !(*r >= 0.0)) {
            return Err(contract("diagonal regularizer must be non-negative"));
        }
        Ok(Self { curvature, reg, b, scale })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn curvature(&self) -> &DMatrix<T> {
        &self.curvature
    }

    pub fn reg(&self) -> &RVec {
        &self.reg
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The dense matrix `W`.
    pub fn w(&self) -> DMatrix<T> {
        let mut w = self.curvature.map(|v| v.scale(self.scale));
        for n in 0..self.dim() {
            w[(n, n)] += T::from_real(self.reg[n]);
        }
        w
    }

    pub fn w_diag(&self) -> RVec {
        RVec::from_fn(self.dim(), |n, _| self.scale * self.curvature[(n, n)].clone().real() + self.reg[n])
    }

    pub fn objective(&self, mu: &DVector<T>) -> f64 {
        let cmu = &self.curvature * mu;
        self.objective_with(mu, &cmu)
    }

    fn objective_with(&self, mu: &DVector<T>, cmu: &DVector<T>) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for n in 0..self.dim() {
            let m = mu[n].clone();
            quad += (m.clone().conjugate() * cmu[n].clone()).real() * self.scale + self.reg[n] * m.clone().modulus_squared();
            lin += (m.conjugate() * self.b[n].clone()).real();
        }
        quad - 2.0 * lin
    }

    fn step_with(&self, mu: &DVector<T>, cmu: &DVector<T>, l_t: f64) -> DVector<T> {
        DVector::from_fn(self.dim(), |n, _| {
            let zeta = (mu[n].clone().scale(l_t) - cmu[n].clone()).scale(self.scale) + self.b[n].clone();
            zeta.unscale(self.scale * l_t + self.reg[n])
        })
    }
}

/// Largest eigenvalue estimate of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBound {
    pub value: f64,
    /// Power iteration did not converge and `value` is the max-row-sum bound.
    pub degraded: bool,
}

const POWER_MAX_ITERS: usize = 20_000;
const POWER_RESIDUAL_TOL: f64 = 1e-9;

/// `λ_max` of a Hermitian PSD matrix by power iteration.
///
/// The start vector is a fixed golden-ratio sequence; a constant vector is
/// orthogonal to the dominant eigenvector of many structured matrices.
pub fn spectral_bound<T: ComplexField<RealField = f64>>(matrix: &DMatrix<T>) -> SpectralBound {
    let n = matrix.nrows();
    if n == 0 {
        return SpectralBound { value: 0.0, degraded: false };
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut v = DVector::<T>::from_fn(n, |i, _| T::from_real(0.5 + ((i + 1) as f64 * golden).fract()));
    let norm = v.norm();
    v.unscale_mut(norm);
    for _ in 0..POWER_MAX_ITERS {
        let av = matrix * &v;
        let lambda = v.dotc(&av).real();
        let av_norm = av.norm();
        if !av_norm.is_finite() {
            break;
        }
        if av_norm == 0.0 {
            if max_abs_row_sum(matrix) == 0.0 {
                return SpectralBound { value: 0.0, degraded: false };
            }
            break;
        }
        let residual = (&av - v.map(|z| z.scale(lambda))).norm();
        if residual <= POWER_RESIDUAL_TOL * lambda.abs() {
            return SpectralBound { value: lambda, degraded: false };
        }
        v = av.unscale(av_norm);
    }
    log::warn!("power iteration did not converge on a {n}×{n} matrix; using the row-sum bound");
    SpectralBound { value: max_abs_row_sum(matrix), degraded: true }
}

/// One MM update `μ⁺ = (scale·L·I + diag(reg))⁻¹((scale·L·I + diag(reg) − W)μ + b)`.
pub fn mm_step<T: ComplexField<RealField = f64>>(problem: &QuadraticProblem<T>, mu: &DVector<T>, l_t: f64) -> DVector<T> {
    let cmu = problem.curvature() * mu;
    problem.step_with(mu, &cmu, l_t)
}

/// One executed MM step, as reported to observers.
#[derive(Debug)]
pub struct MmStep<'a, T: ComplexField<RealField = f64>> {
    pub t: usize,
    pub l_t: f64,
    pub phi_before: f64,
    pub phi_after: f64,
    pub problem: &'a QuadraticProblem<T>,
}

#[derive(Debug, Clone)]
pub struct MmOutcome<T: ComplexField<RealField = f64>> {
    pub mu: DVector<T>,
    pub steps: usize,
    /// Stopped on the relative-step criterion before exhausting the budget.
    pub stopped_early: bool,
    /// Steps whose objective increased, meaning `L(t)` did not majorize.
    pub ascent_steps: usize,
}

const ASCENT_SLACK: f64 = 1e-10;

pub fn mm_solve<T: ComplexField<RealField = f64>>(
    problem: &QuadraticProblem<T>,
    schedule: &MmSchedule,
    warm_start: &DVector<T>,
) -> Result<MmOutcome<T>> {
    mm_solve_observed(problem, schedule, warm_start, &mut |_| {})
}

pub fn mm_solve_observed<T: ComplexField<RealField = f64>>(
    problem: &QuadraticProblem<T>,
    schedule: &MmSchedule,
    warm_start: &DVector<T>,
    observer: &mut dyn FnMut(&MmStep<'_, T>),
) -> Result<MmOutcome<T>> {
    if warm_start.len() != problem.dim() {
        return Err(contract("warm start has the wrong length"));
    }
    let mut mu = warm_start.clone();
    let mut cmu = problem.curvature() * &mu;
    let mut phi = problem.objective_with(&mu, &cmu);
    let mut out = MmOutcome { mu: DVector::zeros(0), steps: 0, stopped_early: false, ascent_steps: 0 };
    for t in 0..schedule.max_local_iters() {
        let l_t = schedule.l_at(t);
        let next = problem.step_with(&mu, &cmu, l_t);
        let cnext = problem.curvature() * &next;
        let phi_next = problem.objective_with(&next, &cnext);
        if phi_next > phi + ASCENT_SLACK * phi.abs().max(1.0) {
            out.ascent_steps += 1;
            log::debug!("majorization violated at local step {t}: L = {l_t:.6e}, φ rose by {:.3e}", phi_next - phi);
        }
        observer(&MmStep { t, l_t, phi_before: phi, phi_after: phi_next, problem });
        let step = (&next - &mu).norm();
        let size = next.norm();
        mu = next;
        cmu = cnext;
        phi = phi_next;
        out.steps = t + 1;
        if step <= schedule.stop_tol() * size || (step == 0.0 && size == 0.0) {
            out.stopped_early = true;
            break;
        }
    }
    out.mu = mu;
    Ok(out)
}

/// Diagonal covariance approximation `[1/W₁₁, …, 1/W_NN]`.
pub fn diag_covariance<T: ComplexField<RealField = f64>>(problem: &QuadraticProblem<T>) -> Result<RVec> {
    let d = problem.w_diag();
    if let Some(n) = d.iter().position(|v| !(*v > 0.0)) {
        return Err(contract(format!("W has non-positive diagonal entry {} at {n}", d[n])));
    }
    Ok(d.map(|v| 1.0 / v))
}

/// Schedules for the two MM subproblems of the inverse-free estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IfslaParams {
    pub x: MmParams,
    pub theta: MmParams,
}

impl IfslaParams {
    pub fn solver(&self) -> Solver {
        Solver::InverseFree { x: self.x, theta: self.theta }
    }
}

/// The two-stage estimator with both quadratic subproblems solved by MM and
/// diagonal covariances.
pub fn run_ifsla_vbi(
    y: &CVec,
    spec: &dyn SensingModel,
    prior: &ThreeLayerPrior,
    config: &SlaConfig,
    params: &IfslaParams,
    obs: &mut dyn Observer,
) -> Result<Estimate> {
    run_two_stage(y, spec, prior, config, params.solver(), obs)
}
