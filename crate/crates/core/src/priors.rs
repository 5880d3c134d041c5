//! Hierarchical sparse prior, noise-precision prior and Gaussian grid prior.
//!
//! The support `s_n ∈ {0, 1}` selects between two Gamma priors on the
//! precision `ρ_n` of `x_n`: an "active" one with mean of order one and an
//! "inactive" one with a very large mean that pins `x_n` to zero.

use crate::error::{contract, domain, Result};
use crate::linalg::RVec;
use crate::special::digamma;

/// Gamma distribution in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
            return Err(domain(format!(
                "Gamma parameters must be finite and positive (shape = {shape}, rate = {rate})"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// `E[ln X] = ψ(shape) − ln(rate)`.
    pub fn log_mean(&self) -> f64 {
        // shape > 0 is a type invariant
        digamma(self.shape).expect("valid shape") - self.rate.ln()
    }
}

/// Returns `(E[X], E[ln X])` for `X ~ Ga(shape, rate)`.
pub fn gamma_moments(g: &GammaParams) -> (f64, f64) {
    (g.mean(), g.log_mean())
}

/// Validating wrapper around [`gamma_moments`] for raw parameters.
pub fn gamma_moments_raw(shape: f64, rate: f64) -> Result<(f64, f64)> {
    Ok(gamma_moments(&GammaParams::new(shape, rate)?))
}

/// Per-index Bernoulli-Gamma hierarchy plus the Gamma prior on the noise
/// precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLayerPrior {
    active: Vec<GammaParams>,
    inactive: Vec<GammaParams>,
    support_prob: Vec<f64>,
    noise: GammaParams,
}

/// Default prior probability that a coefficient is active.
pub const DEFAULT_SUPPORT_PROB: f64 = 0.1;

/// Minimum ratio of inactive to active precision means accepted by
/// [`ThreeLayerPrior::is_well_separated`].
pub const MIN_PRECISION_SEPARATION: f64 = 1e3;

impl ThreeLayerPrior {
    pub fn new(
        active: Vec<GammaParams>,
        inactive: Vec<GammaParams>,
        support_prob: Vec<f64>,
        noise: GammaParams,
    ) -> Result<Self> {
        let n = active.len();
        if n == 0 || inactive.len() != n || support_prob.len() != n {
            return Err(contract(format!(
                "prior vectors must share a non-zero length (active {}, inactive {}, support {})",
                n,
                inactive.len(),
                support_prob.len()
            )));
        }
        if let Some((i, p)) = support_prob.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(domain(format!("support probability λ[{i}] = {p} outside [0, 1]")));
        }
        Ok(Self { active, inactive, support_prob, noise })
    }

    /// Uniform prior over `n` indices with the same hyperparameters everywhere.
    pub fn uniform(
        n: usize,
        active: GammaParams,
        inactive: GammaParams,
        support_prob: f64,
        noise: GammaParams,
    ) -> Result<Self> {
        if n == 0 {
            return Err(contract("prior needs at least one index"));
        }
        Self::new(vec![active; n], vec![inactive; n], vec![support_prob; n], noise)
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active(&self) -> &[GammaParams] {
        &self.active
    }

    pub fn inactive(&self) -> &[GammaParams] {
        &self.inactive
    }

    pub fn support_prob(&self) -> &[f64] {
        &self.support_prob
    }

    pub fn noise(&self) -> GammaParams {
        self.noise
    }

    /// Gamma with the prior mean of `ρ_n` after marginalizing the support:
    /// `λ·a/b + (1−λ)·ā/b̄`.
    pub fn marginal_precision(&self, n: usize) -> GammaParams {
        let (on, off, lam) = (self.active[n], self.inactive[n], self.support_prob[n]);
        let mean = lam * on.mean() + (1.0 - lam) * off.mean();
        let shape = lam * on.shape() + (1.0 - lam) * off.shape();
        GammaParams { shape, rate: shape / mean }
    }

    /// Same hyperparameters with a different support prior.
    pub fn with_support_prob(&self, support_prob: Vec<f64>) -> Result<Self> {
        Self::new(self.active.clone(), self.inactive.clone(), support_prob, self.noise)
    }

    /// True when every inactive precision mean exceeds the active one by at
    /// least [`MIN_PRECISION_SEPARATION`].
    pub fn is_well_separated(&self) -> bool {
        self.active
            .iter()
            .zip(&self.inactive)
            .all(|(a, i)| i.mean() > MIN_PRECISION_SEPARATION * a.mean())
    }
}

/// `a = b = ā = 1`, `b̄ = 1e-5`, `c = d = 1e-6` and `λ = 0.1` at every index.
pub fn default_prior(n: usize) -> Result<ThreeLayerPrior> {
    ThreeLayerPrior::uniform(
        n,
        GammaParams::new(1.0, 1.0)?,
        GammaParams::new(1.0, 1e-5)?,
        DEFAULT_SUPPORT_PROB,
        GammaParams::new(1e-6, 1e-6)?,
    )
}

/// Independent Gaussian priors `N(θ̄ʲ, I/κʲ)` on each block of grid
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrior {
    means: Vec<RVec>,
    precisions: Vec<f64>,
}

impl GridPrior {
    pub fn new(means: Vec<RVec>, precisions: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.len() != precisions.len() {
            return Err(contract("grid prior needs one precision per non-empty block list"));
        }
        let n = means[0].len();
        if n == 0 || means.iter().any(|m| m.len() != n) {
            return Err(contract("grid prior blocks must share a non-zero length"));
        }
        if let Some(p) = precisions.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(domain(format!("grid precision must be finite and positive, got {p}")));
        }
        Ok(Self { means, precisions })
    }

    /// Precision `1 / (4Δ²)` per block, where `Δ` is the mean spacing of the
    /// sorted initial grid values of that block.
    pub fn from_spacing(means: Vec<RVec>) -> Result<Self> {
        let precisions = means
            .iter()
            .map(|m| {
                let spacing = mean_spacing(m.as_slice());
                if spacing > 0.0 {
                    1.0 / (4.0 * spacing * spacing)
                } else {
                    1.0
                }
            })
            .collect();
        Self::new(means, precisions)
    }

    pub fn blocks(&self) -> usize {
        self.means.len()
    }

    pub fn len(&self) -> usize {
        self.means[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self, block: usize) -> &RVec {
        &self.means[block]
    }

    pub fn means(&self) -> &[RVec] {
        &self.means
    }

    pub fn precision(&self, block: usize) -> f64 {
        self.precisions[block]
    }
}

/// Average gap between distinct sorted values; zero for a single value.
pub fn mean_spacing(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        return 0.0;
    }
    (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
}
