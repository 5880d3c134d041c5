//! Dynamic-grid sensing matrices `θ ↦ F(θ)` and their first-order expansion.

use std::ops::Deref;

use crate::error::{contract, Result};
use crate::linalg::{column_norms_squared, gram, CMat, CVec, RMat, RVec, C64};

/// Parameters `θ_n = [θ_n¹, …, θ_nᴮ]` of one basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint(pub Vec<f64>);

impl Deref for GridPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A map from grid parameters to basis vectors.
///
/// Implementations must be read-only after construction so that several
/// estimator runs can evaluate one model concurrently.
pub trait SensingModel: Send + Sync {
    /// Number of measurements `M`.
    fn measurements(&self) -> usize;
    /// Number of basis vectors `N`.
    fn columns(&self) -> usize;
    /// Number of parameter blocks `B`.
    fn blocks(&self) -> usize;
    /// `Φ(θ_n)`, a length-`M` vector.
    fn basis(&self, point: &[f64]) -> CVec;
    /// `∂Φ(θ_n)/∂θ_nʲ` for block `j`.
    fn basis_derivative(&self, point: &[f64], block: usize) -> CVec;

    /// Basis vector together with all block derivatives. Models that share
    /// work between the two should override this.
    fn basis_with_derivatives(&self, point: &[f64]) -> (CVec, Vec<CVec>) {
        let d = (0..self.blocks()).map(|j| self.basis_derivative(point, j)).collect();
        (self.basis(point), d)
    }
}

/// Per-block grid parameters `θʲ ∈ ℝᴺ`, `j = 1..B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    blocks: Vec<RVec>,
}

impl Grid {
    pub fn new(blocks: Vec<RVec>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(contract("grid needs at least one block"));
        }
        let n = blocks[0].len();
        if blocks.iter().any(|b| b.len() != n) {
            return Err(contract("grid blocks must have equal length"));
        }
        Ok(Self { blocks })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn len(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block(&self, j: usize) -> &RVec {
        &self.blocks[j]
    }

    pub fn block_mut(&mut self, j: usize) -> &mut RVec {
        &mut self.blocks[j]
    }

    pub fn blocks(&self) -> &[RVec] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<RVec> {
        self.blocks
    }

    pub fn point(&self, n: usize) -> GridPoint {
        GridPoint(self.blocks.iter().map(|b| b[n]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

fn check_dims(spec: &dyn SensingModel, grid: &Grid) -> Result<()> {
    if grid.num_blocks() != spec.blocks() || grid.len() != spec.columns() {
        return Err(contract(format!(
            "grid is {} blocks × {} points but the model expects {} × {}",
            grid.num_blocks(),
            grid.len(),
            spec.blocks(),
            spec.columns()
        )));
    }
    Ok(())
}

/// Evaluates `F(μ̂)` and the derivative matrices `Aʲ` column by column.
pub fn assemble(spec: &dyn SensingModel, mu_hat: &Grid) -> Result<(CMat, Vec<CMat>)> {
    check_dims(spec, mu_hat)?;
    let (m, n, b) = (spec.measurements(), spec.columns(), spec.blocks());
    let mut f = CMat::zeros(m, n);
    let mut derivs = vec![CMat::zeros(m, n); b];
    for col in 0..n {
        let point = mu_hat.point(col);
        let (phi, d) = spec.basis_with_derivatives(&point);
        if phi.len() != m || d.len() != b {
            return Err(contract("sensing model returned vectors of the wrong size"));
        }
        f.set_column(col, &phi);
        for (j, dj) in d.iter().enumerate() {
            derivs[j].set_column(col, dj);
        }
    }
    Ok((f, derivs))
}

/// `F̂ᴴF̂ + Σⱼ (AʲᴴAʲ) ⊙ Σ_θʲ` for full (symmetric PSD) grid covariances.
pub fn linearized_second_moment(f_hat: &CMat, derivs: &[CMat], sigma_theta: &[RMat]) -> Result<CMat> {
    if derivs.len() != sigma_theta.len() {
        return Err(contract("one grid covariance per derivative block is required"));
    }
    let n = f_hat.ncols();
    let mut h = gram(f_hat);
    for (a, s) in derivs.iter().zip(sigma_theta) {
        if a.shape() != f_hat.shape() || s.shape() != (n, n) {
            return Err(contract("derivative or covariance shape mismatch"));
        }
        check_covariance(s)?;
        let g = gram(a);
        for j in 0..n {
            for i in 0..n {
                h[(i, j)] += g[(i, j)] * s[(i, j)];
            }
        }
    }
    crate::linalg::hermitian_part(&mut h);
    Ok(h)
}

fn check_covariance(s: &RMat) -> Result<()> {
    let n = s.nrows();
    for i in 0..n {
        if !(s[(i, i)] >= 0.0) {
            return Err(contract(format!("grid covariance diagonal entry {i} is {}", s[(i, i)])));
        }
        for j in 0..i {
            let (a, b) = (s[(i, j)], s[(j, i)]);
            if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(1.0) {
                return Err(contract("grid covariance is not symmetric"));
            }
        }
    }
    Ok(())
}

/// First-order expansion of `F(θ)` around `μ̂` with the statistics consumed
/// by the coordinate updates.
///
/// Grid covariances are diagonal, so `(AʲᴴAʲ) ⊙ Σ_θʲ` only touches the
/// diagonal of `H_x`.
#[derive(Debug, Clone)]
pub struct LinearizedModel {
    f_hat: CMat,
    derivs: Vec<CMat>,
    gram_f: CMat,
    gram_derivs: Vec<CMat>,
    h_x: CMat,
    mu_hat: Grid,
}

impl LinearizedModel {
    /// Assembles the model at `mu_hat` with diagonal grid covariances.
    pub fn relinearize(spec: &dyn SensingModel, mu_hat: &Grid, sigma_theta: &[RVec]) -> Result<Self> {
        let (f_hat, derivs) = assemble(spec, mu_hat)?;
        Self::from_parts(f_hat, derivs, mu_hat.clone(), sigma_theta)
    }

    pub fn from_parts(f_hat: CMat, derivs: Vec<CMat>, mu_hat: Grid, sigma_theta: &[RVec]) -> Result<Self> {
        let n = f_hat.ncols();
        if derivs.len() != mu_hat.num_blocks() || mu_hat.len() != n {
            return Err(contract("derivative blocks must match the grid"));
        }
        if derivs.iter().any(|a| a.shape() != f_hat.shape()) {
            return Err(contract("derivative matrices must match F̂ in shape"));
        }
        let gram_f = gram(&f_hat);
        let gram_derivs: Vec<CMat> = derivs.iter().map(gram).collect();
        let mut model = Self { h_x: gram_f.clone(), f_hat, derivs, gram_f, gram_derivs, mu_hat };
        model.set_grid_covariance(sigma_theta)?;
        Ok(model)
    }

    /// Recomputes `H_x` for new diagonal grid covariances without
    /// re-evaluating the basis.
    pub fn set_grid_covariance(&mut self, sigma_theta: &[RVec]) -> Result<()> {
        let n = self.f_hat.ncols();
        if sigma_theta.len() != self.derivs.len() || sigma_theta.iter().any(|s| s.len() != n) {
            return Err(contract("one length-N covariance diagonal per block is required"));
        }
        if sigma_theta.iter().flat_map(|s| s.iter()).any(|v| !(*v >= 0.0)) {
            return Err(contract("grid covariance diagonals must be non-negative"));
        }
        self.h_x.copy_from(&self.gram_f);
        for (g, s) in self.gram_derivs.iter().zip(sigma_theta) {
            for i in 0..n {
                self.h_x[(i, i)] += C64::new(g[(i, i)].re * s[i], 0.0);
            }
        }
        Ok(())
    }

    pub fn f_hat(&self) -> &CMat {
        &self.f_hat
    }

    pub fn derivs(&self) -> &[CMat] {
        &self.derivs
    }

    pub fn deriv(&self, j: usize) -> &CMat {
        &self.derivs[j]
    }

    /// `F̂ᴴF̂`.
    pub fn gram_f(&self) -> &CMat {
        &self.gram_f
    }

    /// `AʲᴴAʲ`.
    pub fn gram_deriv(&self, j: usize) -> &CMat {
        &self.gram_derivs[j]
    }

    /// `⟨F̄ᴴF̄⟩` under the current grid posterior.
    pub fn h_x(&self) -> &CMat {
        &self.h_x
    }

    pub fn mu_hat(&self) -> &Grid {
        &self.mu_hat
    }

    pub fn measurements(&self) -> usize {
        self.f_hat.nrows()
    }

    pub fn columns(&self) -> usize {
        self.f_hat.ncols()
    }

    pub fn blocks(&self) -> usize {
        self.derivs.len()
    }

    /// Squared column norms of `F̂`.
    pub fn column_energy(&self) -> RVec {
        column_norms_squared(&self.f_hat)
    }
}

/// Largest relative error between `basis_derivative` and a central finite
/// difference of `basis` at `point`.
pub fn derivative_consistency(spec: &dyn SensingModel, point: &[f64], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..spec.blocks() {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[j] += step;
        minus[j] -= step;
        let fd = (spec.basis(&plus) - spec.basis(&minus)) / C64::new(2.0 * step, 0.0);
        let exact = spec.basis_derivative(point, j);
        let scale = exact.norm().max(spec.basis(point).norm()).max(f64::MIN_POSITIVE);
        worst = worst.max((fd - exact).norm() / scale);
    }
    worst
}
