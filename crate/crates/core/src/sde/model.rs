use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Family tag of a [`ModelSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ou,
    Ckls,
    /// `σ²(x) = σ² x²`, the diffusion-only null of the size/power studies.
    ScaleDiffusion,
    Scenario,
    Custom,
}

/// Drift functions of the Monte Carlo scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioDrift {
    /// `m₁(x) = 0`
    Zero,
    /// `m₂(x) = 2`
    Two,
    /// `m₃(x) = x`
    Identity,
    /// `m₄(x) = 2 - x`
    TwoMinusX,
    /// `m₅(x, t) = t x`; zero for `t < 0` so burn-in runs drift-free.
    TimeTimesX,
}

impl ScenarioDrift {
    pub fn eval(self, x: f64, t: f64) -> f64 {
        match self {
            ScenarioDrift::Zero => 0.0,
            ScenarioDrift::Two => 2.0,
            ScenarioDrift::Identity => x,
            ScenarioDrift::TwoMinusX => 2.0 - x,
            ScenarioDrift::TimeTimesX => t.max(0.0) * x,
        }
    }

    pub fn is_time_homogeneous(self) -> bool {
        !matches!(self, ScenarioDrift::TimeTimesX)
    }
}

/// Diffusion functions of the Monte Carlo scenarios, named by `σ²(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioDiffusion {
    /// `x²`
    Square,
    /// `1 + x²`
    OnePlusSquare,
    /// `1`
    Unit,
    /// `5 |x|^1.5`
    FivePow15,
    /// `5 |x|`
    FiveAbs,
    /// `(1 + x)²`
    ShiftedSquare,
}

impl ScenarioDiffusion {
    pub fn sigma2(self, x: f64) -> f64 {
        match self {
            ScenarioDiffusion::Square => x * x,
            ScenarioDiffusion::OnePlusSquare => 1.0 + x * x,
            ScenarioDiffusion::Unit => 1.0,
            ScenarioDiffusion::FivePow15 => 5.0 * x.abs().powf(1.5),
            ScenarioDiffusion::FiveAbs => 5.0 * x.abs(),
            ScenarioDiffusion::ShiftedSquare => (1.0 + x) * (1.0 + x),
        }
    }

    pub fn sigma(self, x: f64) -> f64 {
        match self {
            ScenarioDiffusion::Square => x.abs(),
            ScenarioDiffusion::ShiftedSquare => (1.0 + x).abs(),
            ScenarioDiffusion::Unit => 1.0,
            other => other.sigma2(x).sqrt(),
        }
    }

    /// `σ(x) σ'(x)`, i.e. `(σ²)'(x) / 2`.
    pub fn sigma_sigma_prime(self, x: f64) -> f64 {
        match self {
            ScenarioDiffusion::Square => x,
            ScenarioDiffusion::OnePlusSquare => x,
            ScenarioDiffusion::Unit => 0.0,
            ScenarioDiffusion::FivePow15 => 3.75 * x.abs().sqrt() * x.signum(),
            ScenarioDiffusion::FiveAbs => 2.5 * x.signum(),
            ScenarioDiffusion::ShiftedSquare => 1.0 + x,
        }
    }
}

pub type DriftFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type DiffusionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Ou { mu: f64, kappa: f64, sigma: f64 },
    Ckls { kappa: f64, mu: f64, sigma: f64, gamma: f64 },
    ScaleDiffusion { sigma: f64 },
    Scenario { drift: ScenarioDrift, diffusion: ScenarioDiffusion },
    Custom { drift: DriftFn, diffusion: DiffusionFn },
}

/// A parametric drift/diffusion pair `m(x, θ)`, `σ(x, θ)`.
#[derive(Clone)]
pub struct ModelSpec {
    kind: Kind,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Custom { .. } => f.write_str("ModelSpec::Custom"),
            _ => write!(f, "ModelSpec::{:?}{:?}", self.family(), self.theta()),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

impl ModelSpec {
    /// `dX = κ(μ - X)dt + σ dW`, θ = (μ, κ, σ).
    pub fn ou(mu: f64, kappa: f64, sigma: f64) -> Result<Self> {
        finite("mu", mu)?;
        positive("kappa", kappa)?;
        positive("sigma", sigma)?;
        Ok(Self {
            kind: Kind::Ou { mu, kappa, sigma },
        })
    }

    /// `dX = κ(μ - X)dt + σ|X|^γ dW`, θ = (κ, μ, σ, γ).
    ///
    /// `κ` may be non-positive: a fitted CKLS model without mean reversion is
    /// still a valid data-generating model for bootstrap purposes.
    pub fn ckls(kappa: f64, mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        finite("kappa", kappa)?;
        finite("mu", mu)?;
        positive("sigma", sigma)?;
        finite("gamma", gamma)?;
        Ok(Self {
            kind: Kind::Ckls {
                kappa,
                mu,
                sigma,
                gamma,
            },
        })
    }

    /// `σ²(x) = σ² x²` with zero drift, θ = (σ).
    pub fn scale_diffusion(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self {
            kind: Kind::ScaleDiffusion { sigma },
        })
    }

    pub fn scenario(drift: ScenarioDrift, diffusion: ScenarioDiffusion) -> Self {
        Self {
            kind: Kind::Scenario { drift, diffusion },
        }
    }

    /// Arbitrary drift `m(x, t)` and diffusion `σ(x)`. The Milstein scheme
    /// differentiates `σ` numerically for custom models.
    pub fn custom(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: Kind::Custom {
                drift: Arc::new(drift),
                diffusion: Arc::new(diffusion),
            },
        }
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Ou { .. } => Family::Ou,
            Kind::Ckls { .. } => Family::Ckls,
            Kind::ScaleDiffusion { .. } => Family::ScaleDiffusion,
            Kind::Scenario { .. } => Family::Scenario,
            Kind::Custom { .. } => Family::Custom,
        }
    }

    /// Number of free parameters of the family.
    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::Ou { .. } => 3,
            Kind::Ckls { .. } => 4,
            Kind::ScaleDiffusion { .. } => 1,
            Kind::Scenario { .. } | Kind::Custom { .. } => 0,
        }
    }

    pub fn theta(&self) -> Vec<f64> {
        match self.kind {
            Kind::Ou { mu, kappa, sigma } => vec![mu, kappa, sigma],
            Kind::Ckls {
                kappa,
                mu,
                sigma,
                gamma,
            } => vec![kappa, mu, sigma, gamma],
            Kind::ScaleDiffusion { sigma } => vec![sigma],
            Kind::Scenario { .. } | Kind::Custom { .. } => Vec::new(),
        }
    }

    /// Same family with a new parameter vector.
    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.dim() {
            return Err(Error::invalid(format!(
                "{:?} takes {} parameters, got {}",
                self.family(),
                self.dim(),
                theta.len()
            )));
        }
        match self.kind {
            Kind::Ou { .. } => Self::ou(theta[0], theta[1], theta[2]),
            Kind::Ckls { .. } => Self::ckls(theta[0], theta[1], theta[2], theta[3]),
            Kind::ScaleDiffusion { .. } => Self::scale_diffusion(theta[0]),
            Kind::Scenario { .. } | Kind::Custom { .. } => Ok(self.clone()),
        }
    }

    pub fn is_time_homogeneous(&self) -> bool {
        match &self.kind {
            Kind::Scenario { drift, .. } => drift.is_time_homogeneous(),
            _ => true,
        }
    }

    pub fn drift(&self, x: f64, t: f64) -> f64 {
        match &self.kind {
            Kind::Ou { mu, kappa, .. } => kappa * (mu - x),
            Kind::Ckls { kappa, mu, .. } => kappa * (mu - x),
            Kind::ScaleDiffusion { .. } => 0.0,
            Kind::Scenario { drift, .. } => drift.eval(x, t),
            Kind::Custom { drift, .. } => drift(x, t),
        }
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Ou { sigma, .. } => *sigma,
            Kind::Ckls { sigma, gamma, .. } => sigma * x.abs().powf(*gamma),
            Kind::ScaleDiffusion { sigma } => sigma * x.abs(),
            Kind::Scenario { diffusion, .. } => diffusion.sigma(x),
            Kind::Custom { diffusion, .. } => diffusion(x),
        }
    }

    pub fn variance(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::ScaleDiffusion { sigma } => sigma * sigma * x * x,
            Kind::Scenario { diffusion, .. } => diffusion.sigma2(x),
            _ => {
                let s = self.diffusion(x);
                s * s
            }
        }
    }

    /// `σ(x) σ'(x)`, the Milstein correction coefficient.
    ///
    /// Analytic for the registered families; custom models use a central
    /// difference with step `1e-6 · max(1, |x|)`.
    pub fn sigma_sigma_prime(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Ou { .. } => 0.0,
            Kind::Ckls { sigma, gamma, .. } => {
                // σ|x|^γ · γσ|x|^{γ-1} sgn(x)
                gamma * sigma * sigma * x.abs().powf(2.0 * gamma - 1.0) * x.signum()
            }
            Kind::ScaleDiffusion { sigma } => sigma * sigma * x,
            Kind::Scenario { diffusion, .. } => diffusion.sigma_sigma_prime(x),
            Kind::Custom { diffusion, .. } => {
                let h = 1e-6 * x.abs().max(1.0);
                diffusion(x) * (diffusion(x + h) - diffusion(x - h)) / (2.0 * h)
            }
        }
    }
}
