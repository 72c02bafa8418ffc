use super::ParamEstimate;
use crate::sde::{Family, RegressionSample};
use crate::{Error, Result};

/// Quadratic-variation ratio `Σ(ΔX)² / (Δ ΣX²)` for fixed covariates `x` and
/// scaled increments `y = ΔX/Δ`.
pub fn scale_sigma2(x: &[f64], y: &[f64], delta: f64) -> Result<f64> {
    let sx2: f64 = x.iter().map(|v| v * v).sum();
    if !(sx2 > 0.0) {
        return Err(Error::degenerate("all covariates are zero"));
    }
    let sy2: f64 = y.iter().map(|v| v * v).sum();
    Ok(delta * sy2 / sx2)
}

/// Closed-form estimate of σ under `σ²(x) = σ² x²`. Returns θ = (σ).
///
/// The drift is left unmodelled; it contributes `O(Δ²)` per squared
/// increment.
pub fn fit_scale_diffusion(sample: &RegressionSample) -> Result<ParamEstimate> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let delta = sample.delta();
    let s2 = scale_sigma2(sample.x(), sample.y(), delta)?;
    let mut loglik = 0.0;
    for (&x, &y) in sample.x().iter().zip(sample.y()) {
        if x != 0.0 {
            let v = s2 * x * x * delta;
            let dx = y * delta;
            loglik -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + dx * dx / v);
        }
    }
    Ok(ParamEstimate {
        family: Family::ScaleDiffusion,
        theta_hat: vec![s2.sqrt()],
        loglik,
        converged: true,
        iterations: 0,
    })
}
