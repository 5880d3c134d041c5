//! Joint recovery of structured sparse signals and dynamic grid parameters.
//!
//! The observation model is `y = F(θ) x + w`, where the columns of the sensing
//! matrix depend on per-column grid parameters `θ` that are treated as hidden
//! variables. The crate provides:
//!
//! - [`priors`]: the three-layer support/precision/signal prior and the Gamma
//!   and Gaussian building blocks.
//! - [`sensing`]: the [`SensingModel`](sensing::SensingModel) abstraction and the
//!   first-order expansion of `F(θ)` around the current grid estimate.
//! - [`vbi`]: the successive-linearization mean-field estimator with exact
//!   (matrix-inverse) coordinate updates.
//! - [`mm`]: majorization-minimization solvers that replace those inverses by
//!   matrix-vector products, and the inverse-free estimator built on them.
//! - [`turbo`]: turbo message exchange with a 2-D Markov random field support
//!   prior.
//! - [`apps`]: massive MIMO channel estimation and OFDM target localization
//!   models with ground-truth generators and metrics.

pub mod apps;
pub mod error;
pub mod linalg;
pub mod mm;
pub mod priors;
pub mod sensing;
pub mod special;
pub mod turbo;
pub mod vbi;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
