//! Turbo exchange between the inverse-free estimator and a 4-connected
//! Ising support prior solved by loopy sum-product.
//!
//! Supports are spins `s ∈ {+1, −1}` with prior `∝ exp(β Σ s_n s_m − α Σ s_n)`
//! over lattice edges; all message arithmetic is in the log domain.

use crate::error::{contract, Result};
use crate::linalg::{CVec, RVec};
use crate::mm::IfslaParams;
use crate::priors::ThreeLayerPrior;
use crate::sensing::SensingModel;
use crate::special::{log_add_exp, sigmoid};
use crate::vbi::{Estimate, Estimator, Observer, SlaConfig};

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_SWEEPS: usize = 5;
pub const DEFAULT_INNER_ITERS: usize = 10;
pub const DEFAULT_ROUNDS: usize = 4;
pub const PROB_CLAMP: f64 = 1e-12;

/// Bernoulli messages, one probability of `s_n = 1` per index.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicMessages {
    probs: RVec,
}

impl ExtrinsicMessages {
    pub fn new(probs: RVec) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(contract("message probabilities must lie in [0, 1]"));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: RVec::from_element(n, 0.5) }
    }

    pub fn probs(&self) -> &RVec {
        &self.probs
    }

    pub fn into_probs(self) -> RVec {
        self.probs
    }
}

fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Posterior divided by the incoming prior message, normalized. Returns the
/// messages and how many prior entries had to be clamped away from {0, 1}.
pub fn extrinsic_from_a(support_post: &RVec, prior_in: &RVec) -> Result<(ExtrinsicMessages, usize)> {
    if support_post.len() != prior_in.len() {
        return Err(contract("posterior and prior messages differ in length"));
    }
    let mut clamped = 0;
    let mut out = RVec::zeros(prior_in.len());
    for n in 0..prior_in.len() {
        let (l, mut phi) = (support_post[n], prior_in[n]);
        if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&phi) {
            return Err(contract(format!("probability outside [0, 1] at index {n}")));
        }
        if phi < PROB_CLAMP || phi > 1.0 - PROB_CLAMP {
            phi = phi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            clamped += 1;
        }
        out[n] = sigmoid(logit(l) - logit(phi));
    }
    if clamped > 0 {
        log::debug!("clamped {clamped} prior messages away from 0/1");
    }
    Ok((ExtrinsicMessages { probs: out }, clamped))
}

/// 4-connected lattice prior; index `n = row·cols + col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrfPrior {
    pub alpha: f64,
    pub beta: f64,
    rows: usize,
    cols: usize,
}

impl MrfPrior {
    pub fn new(alpha: f64, beta: f64, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(contract("lattice needs at least one row and column"));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(contract("MRF parameters must be finite"));
        }
        Ok(Self { alpha, beta, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Neighbor of `n` in direction `d`, if inside the lattice.
    pub fn neighbor(&self, n: usize, d: Direction) -> Option<usize> {
        let (r, c) = (n / self.cols, n % self.cols);
        match d {
            Direction::Left => (c > 0).then(|| n - 1),
            Direction::Right => (c + 1 < self.cols).then(|| n + 1),
            Direction::Top => (r > 0).then(|| n - self.cols),
            Direction::Bottom => (r + 1 < self.rows).then(|| n + self.cols),
        }
    }

    /// The output message when every incoming message is uninformative.
    pub fn marginal_bias(&self) -> f64 {
        1.0 / (1.0 + (2.0 * self.alpha).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Top,
    Bottom,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Top, Direction::Bottom];

    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::Top => Direction::Bottom,
            Direction::Bottom => Direction::Top,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// `κ_nᵈ`: message into node `n` from its neighbor in direction `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfMessageState {
    kappa: [RVec; 4],
}

impl MrfMessageState {
    pub fn uniform(n: usize) -> Self {
        let half = RVec::from_element(n, 0.5);
        Self { kappa: [half.clone(), half.clone(), half.clone(), half] }
    }

    pub fn get(&self, d: Direction) -> &RVec {
        &self.kappa[d.index()]
    }

    pub fn len(&self) -> usize {
        self.kappa[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LogPair {
    on: f64,
    off: f64,
}

/// Log weights of `s_m = ±1` from the incoming message, the unary term and
/// all neighbor messages except the one from `exclude`.
fn node_belief(prior: &MrfPrior, incoming: f64, state: &MrfMessageState, m: usize, exclude: Option<Direction>) -> LogPair {
    let mut on = incoming.ln() - prior.alpha;
    let mut off = (-incoming).ln_1p() + prior.alpha;
    for d in Direction::ALL {
        if Some(d) == exclude {
            continue;
        }
        let k = state.get(d)[m];
        on += k.ln();
        off += (-k).ln_1p();
    }
    LogPair { on, off }
}

fn normalize(w: LogPair, undefined: &mut usize) -> f64 {
    if w.on == f64::NEG_INFINITY && w.off == f64::NEG_INFINITY {
        *undefined += 1;
        return 0.5;
    }
    sigmoid(w.on - w.off)
}

/// One synchronous sum-product sweep over all four message fields. Returns
/// the new state and the number of messages whose weights were both zero.
pub fn mrf_sweep(prior: &MrfPrior, incoming: &ExtrinsicMessages, state: &MrfMessageState) -> Result<(MrfMessageState, usize)> {
    let n = prior.len();
    if incoming.probs().len() != n || state.len() != n {
        return Err(contract("message lengths do not match the lattice"));
    }
    let beta = prior.beta;
    let mut next = MrfMessageState::uniform(n);
    let mut undefined = 0;
    for d in Direction::ALL {
        for node in 0..n {
            let Some(m) = prior.neighbor(node, d) else { continue };
            // m sees node in the opposite direction; that message is excluded.
            let w = node_belief(prior, incoming.probs()[m], state, m, Some(d.opposite()));
            let plus = log_add_exp(w.on + beta, w.off - beta);
            let minus = log_add_exp(w.on - beta, w.off + beta);
            next.kappa[d.index()][node] = normalize(LogPair { on: plus, off: minus }, &mut undefined);
        }
    }
    Ok((next, undefined))
}

/// Prior message back to the estimator: unary term times all four neighbor
/// messages.
pub fn mrf_output(prior: &MrfPrior, state: &MrfMessageState) -> Result<(ExtrinsicMessages, usize)> {
    if state.len() != prior.len() {
        return Err(contract("message state does not match the lattice"));
    }
    let mut undefined = 0;
    let mut out = RVec::zeros(prior.len());
    for n in 0..prior.len() {
        let w = node_belief(prior, 0.5, state, n, None);
        out[n] = normalize(w, &mut undefined);
    }
    Ok((ExtrinsicMessages { probs: out }, undefined))
}

/// Turbo schedule: `rounds` exchanges, each with up to `inner_iters`
/// estimator iterations and `sweeps` lattice sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboParams {
    pub inner_iters: usize,
    pub rounds: usize,
    pub sweeps: usize,
}

impl Default for TurboParams {
    fn default() -> Self {
        Self { inner_iters: DEFAULT_INNER_ITERS, rounds: DEFAULT_ROUNDS, sweeps: DEFAULT_SWEEPS }
    }
}

impl TurboParams {
    pub fn stage2_iters(&self) -> usize {
        self.inner_iters * self.rounds
    }
}

/// Inverse-free estimator with its support prior replaced by the lattice's
/// output message, refreshed after every round.
#[allow(clippy::too_many_arguments)]
pub fn run_turbo_ifsla_vbi(
    y: &CVec,
    spec: &dyn SensingModel,
    prior: &ThreeLayerPrior,
    mrf: &MrfPrior,
    config: &SlaConfig,
    mm: &IfslaParams,
    turbo: &TurboParams,
    obs: &mut dyn Observer,
) -> Result<Estimate> {
    if mrf.len() != spec.columns() {
        return Err(contract(format!("{}×{} lattice does not cover {} columns", mrf.rows(), mrf.cols(), spec.columns())));
    }
    if turbo.inner_iters == 0 || turbo.rounds == 0 || turbo.sweeps == 0 {
        return Err(contract("turbo schedule counts must be positive"));
    }
    if config.stage2_iters != turbo.stage2_iters() {
        return Err(contract("stage-2 budget must equal inner iterations times rounds"));
    }
    let mut messages = MrfMessageState::uniform(mrf.len());
    let (phi, undefined) = mrf_output(mrf, &messages)?;
    let mut phi_a = phi.into_probs();
    // `prior`'s λ only seeds the initial λ̃; the lattice output replaces it in
    // every update from stage 1 on.
    let mut est = Estimator::new(y, spec, prior, config, mm.solver())?;
    est.set_support_prior(phi_a.clone())?;
    est.diagnostics_mut().undefined_outputs += undefined;
    for _ in 0..config.stage1_iters {
        est.stage1_iteration(obs)?;
    }
    let mut converged = false;
    for _ in 0..turbo.rounds {
        converged = false;
        for _ in 0..turbo.inner_iters {
            if est.stage2_iteration(obs)? < config.convergence_tol {
                converged = true;
                break;
            }
        }
        let (to_b, clamped) = extrinsic_from_a(&est.state().support_post, &phi_a)?;
        let mut undefined = 0;
        for _ in 0..turbo.sweeps {
            let (next, u) = mrf_sweep(mrf, &to_b, &messages)?;
            messages = next;
            undefined += u;
        }
        let (out, u) = mrf_output(mrf, &messages)?;
        let diag = est.diagnostics_mut();
        diag.clamped_messages += clamped;
        diag.undefined_outputs += undefined + u;
        phi_a = out.into_probs();
        est.set_support_prior(phi_a.clone())?;
    }
    Ok(est.finish(converged))
}
