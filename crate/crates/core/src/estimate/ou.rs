use super::ParamEstimate;
use crate::sde::{Family, Path};
use crate::{Error, Result};

/// Exact Gaussian MLE of `dX = κ(μ - X)dt + σ dW`, conditional on `X_0`.
///
/// The transition is an AR(1), `X_{i+1} = c + φ X_i + η_i`, so the MLE is the
/// least-squares fit mapped back through `φ = e^{-κΔ}`, `c = μ(1 - φ)` and
/// `Var η = σ²(1 - φ²)/(2κ)`. Returns θ = (μ, κ, σ).
pub fn fit_ou(path: &Path) -> Result<ParamEstimate> {
    let x = path.values();
    let n = x.len() - 1;
    if n < 10 {
        return Err(Error::invalid(format!("fit_ou needs at least 10 steps, got {n}")));
    }
    let (prev, next) = (&x[..n], &x[1..]);
    let nf = n as f64;
    let mp = prev.iter().sum::<f64>() / nf;
    let mn = next.iter().sum::<f64>() / nf;
    let sxx: f64 = prev.iter().map(|v| (v - mp) * (v - mp)).sum();
    let sxy: f64 = prev.iter().zip(next).map(|(a, b)| (a - mp) * (b - mn)).sum();
    if !(sxx > 0.0) {
        return Err(Error::degenerate("constant path"));
    }
    let phi = sxy / sxx;
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::NonstationaryFit(format!("AR(1) coefficient {phi} outside (0, 1)")));
    }
    let c = mn - phi * mp;
    let rss: f64 = prev.iter().zip(next).map(|(a, b)| (b - c - phi * a).powi(2)).sum();
    let s2 = rss / nf;

    let delta = path.delta();
    let kappa = -phi.ln() / delta;
    let mu = c / (1.0 - phi);
    let sigma2 = s2 * 2.0 * kappa / (1.0 - phi * phi);
    let loglik = -0.5 * nf * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0);
    Ok(ParamEstimate {
        family: Family::Ou,
        theta_hat: vec![mu, kappa, sigma2.sqrt()],
        loglik,
        converged: true,
        iterations: 0,
    })
}
