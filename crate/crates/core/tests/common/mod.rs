#![allow(dead_code)]

use gridvbi_core::linalg::{RVec, CMat, CVec, C64};
use gridvbi_core::sensing::{Grid, LinearizedModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly-symmetric complex normal with unit variance.
pub fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rand_cmat(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
    CMat::from_fn(m, n, |_, _| cn(rng))
}

pub fn rand_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cn(rng))
}

pub fn rand_rvec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> RVec {
    RVec::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// Random Hermitian positive definite matrix `GGᴴ/n + shift·I`.
pub fn rand_hpd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let g = rand_cmat(rng, n, n);
    let mut s = &g * g.adjoint() / C64::new(n as f64, 0.0);
    for i in 0..n {
        s[(i, i)] += C64::new(shift, 0.0);
    }
    s
}

/// Linearized model with random `F̂`, `Aʲ`, grid point and covariance diagonals.
pub fn rand_linearized(rng: &mut ChaCha8Rng, m: usize, n: usize, blocks: usize, sigma_scale: f64) -> (LinearizedModel, Vec<RVec>) {
    let f = rand_cmat(rng, m, n);
    let a: Vec<CMat> = (0..blocks).map(|_| rand_cmat(rng, m, n)).collect();
    let grid = Grid::new((0..blocks).map(|_| rand_rvec(rng, n, -1.0, 1.0)).collect()).unwrap();
    let sig: Vec<RVec> = (0..blocks).map(|_| rand_rvec(rng, n, 0.0, sigma_scale)).collect();
    (LinearizedModel::from_parts(f, a, grid, &sig).unwrap(), sig)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// `e^x` by its Taylor series after halving the argument, then squaring.
pub fn exp_series(x: f64) -> f64 {
    let mut k = 0;
    let mut y = x;
    while y.abs() > 0.125 {
        y *= 0.5;
        k += 1;
    }
    let (mut term, mut sum) = (1.0, 1.0);
    for i in 1..30 {
        term *= y / i as f64;
        sum += term;
    }
    for _ in 0..k {
        sum *= sum;
    }
    sum
}
