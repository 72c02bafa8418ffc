//! Simulation, estimation and specification testing for scalar diffusion
//! models
//!
//! ```text
//! dX_t = m(X_t, θ) dt + σ(X_t, θ) dW_t
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`sde`] defines parametric models, simulates sample paths (Euler,
//!   Milstein, exact OU, CAR(p), CTAR(1)) and evaluates stationary densities.
//! - [`estimate`] fits the null models used by the tests (OU, CKLS, the
//!   `σ²x²` scale diffusion and discrete/continuous autoregressions).
//! - [`smooth`] holds the Gaussian-kernel estimators of the marginal density,
//!   drift and diffusion functions, bandwidth selection and confidence bands.
//! - [`gof`] computes the marked empirical process (KS/CvM), kernel, GLRT and
//!   distance covariance statistics and calibrates them by parametric
//!   bootstrap or permutation.
//! - [`harness`] runs Monte Carlo size/power experiments.
//!
//! All randomness flows through [`rng::SeedStream`], so every result is a
//! pure function of its inputs and a seed.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod gof;
pub mod harness;
mod numeric;
pub mod rng;
pub mod sde;
pub mod smooth;

pub use error::{Error, Result};
