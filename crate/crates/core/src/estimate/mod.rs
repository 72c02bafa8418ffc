//! Parameter estimation under the null models.

mod ar;
mod car;
mod ckls;
pub(crate) mod optim;
mod ou;
mod scale;

pub use ar::{fit_ar, ArDesign, ArFit};
pub use car::{car_log_likelihood, fit_car, CarFit};
pub use ckls::{fit_ckls, fit_ckls_with, CklsOptions};
pub use ou::fit_ou;
pub use scale::{fit_scale_diffusion, scale_sigma2};

use crate::sde::{Family, ModelSpec};
use crate::Result;

/// A fitted parameter vector in the order used by the matching
/// [`ModelSpec`] constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEstimate {
    pub family: Family,
    pub theta_hat: Vec<f64>,
    /// Attained (pseudo) log-likelihood.
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ParamEstimate {
    /// Parameter names in `theta_hat` order.
    pub fn names(&self) -> &'static [&'static str] {
        match self.family {
            Family::Ou => &["mu", "kappa", "sigma"],
            Family::Ckls => &["kappa", "mu", "sigma", "gamma"],
            Family::ScaleDiffusion => &["sigma"],
            _ => &[],
        }
    }

    /// The fitted model. Fails when an estimate sits on the boundary of the
    /// parameter space (for instance `σ̂ = 0`).
    pub fn model(&self) -> Result<ModelSpec> {
        match self.family {
            Family::Ou => ModelSpec::ou(self.theta_hat[0], self.theta_hat[1], self.theta_hat[2]),
            Family::Ckls => ModelSpec::ckls(
                self.theta_hat[0],
                self.theta_hat[1],
                self.theta_hat[2],
                self.theta_hat[3],
            ),
            Family::ScaleDiffusion => ModelSpec::scale_diffusion(self.theta_hat[0]),
            f => Err(crate::Error::invalid(format!("no parametric model for {f:?}"))),
        }
    }
}
