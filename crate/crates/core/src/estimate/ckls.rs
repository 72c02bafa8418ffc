use super::optim::nelder_mead;
use super::ParamEstimate;
use crate::sde::{Family, RegressionSample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CklsOptions {
    /// Hold γ fixed instead of estimating it.
    pub gamma: Option<f64>,
}

/// Profiled Euler pseudo-likelihood at a given γ.
///
/// For fixed γ the drift coefficients solve a weighted least-squares problem
/// with weights `X^{-2γ}` and σ² has a closed form, so only γ is searched
/// numerically.
struct Profile<'a> {
    x: &'a [f64],
    y: &'a [f64],
    ln_x: Vec<f64>,
    sum_ln_x: f64,
    delta: f64,
}

struct AtGamma {
    a: f64,
    b: f64,
    sigma2: f64,
    loglik: f64,
}

impl<'a> Profile<'a> {
    fn new(sample: &'a RegressionSample) -> Self {
        let ln_x: Vec<f64> = sample.x().iter().map(|v| v.ln()).collect();
        let sum_ln_x = ln_x.iter().sum();
        Self {
            x: sample.x(),
            y: sample.y(),
            ln_x,
            sum_ln_x,
            delta: sample.delta(),
        }
    }

    fn at(&self, gamma: f64) -> Option<AtGamma> {
        let (mut sw, mut swx, mut swxx, mut swy, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&x, &y), &lx) in self.x.iter().zip(self.y).zip(&self.ln_x) {
            let w = (-2.0 * gamma * lx).exp();
            sw += w;
            swx += w * x;
            swxx += w * x * x;
            swy += w * y;
            swxy += w * x * y;
        }
        let det = sw * swxx - swx * swx;
        if !(det > 0.0 && det.is_finite()) {
            return None;
        }
        let b = (sw * swxy - swx * swy) / det;
        let a = (swy - b * swx) / sw;
        let n = self.x.len() as f64;
        // Y_i Δ ~ N((a + b X_i)Δ, σ² X_i^{2γ} Δ)
        let mut wrss = 0.0;
        for ((&x, &y), &lx) in self.x.iter().zip(self.y).zip(&self.ln_x) {
            let r = y - a - b * x;
            wrss += (-2.0 * gamma * lx).exp() * r * r;
        }
        let sigma2 = wrss * self.delta / n;
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return None;
        }
        let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2 * self.delta).ln() + 1.0)
            - gamma * self.sum_ln_x;
        Some(AtGamma { a, b, sigma2, loglik })
    }

    /// Slope of `log (ΔX)²` on `log X`, halved.
    fn moment_gamma(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .ln_x
            .iter()
            .zip(self.y)
            .filter(|(_, &y)| y != 0.0)
            .map(|(&lx, &y)| (lx, (y * self.delta).powi(2).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let g = 0.5 * sxy / sxx;
        if g.is_finite() {
            g.clamp(GAMMA_RANGE.0, GAMMA_RANGE.1)
        } else {
            0.5
        }
    }
}

/// Admissible range for γ during the search.
const GAMMA_RANGE: (f64, f64) = (-1.0, 3.0);

/// Euler pseudo-MLE of `dX = κ(μ - X)dt + σX^γ dW` with γ estimated.
/// Returns θ = (κ, μ, σ, γ).
pub fn fit_ckls(sample: &RegressionSample) -> Result<ParamEstimate> {
    fit_ckls_with(sample, CklsOptions::default())
}

pub fn fit_ckls_with(sample: &RegressionSample, opts: CklsOptions) -> Result<ParamEstimate> {
    if sample.len() < 20 {
        return Err(Error::invalid(format!("fit_ckls needs at least 20 pairs, got {}", sample.len())));
    }
    if let Some(i) = sample.x().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("CKLS needs positive levels; X[{i}] = {}", sample.x()[i])));
    }
    let profile = Profile::new(sample);

    let (gamma, iterations, converged) = match opts.gamma {
        Some(g) => (g, 0, true),
        None => {
            let objective = |g: &[f64]| {
                if g[0] < GAMMA_RANGE.0 || g[0] > GAMMA_RANGE.1 {
                    return f64::INFINITY;
                }
                profile.at(g[0]).map_or(f64::INFINITY, |p| -p.loglik)
            };
            let g0 = profile.moment_gamma();
            let mut best: Option<super::optim::Minimum> = None;
            let mut iterations = 0;
            for start in [g0, g0 - 0.25, g0 + 0.25] {
                let m = nelder_mead(objective, &[start], &[0.1], 1e-8, 500);
                iterations += m.iterations;
                if best.as_ref().map_or(true, |b| m.fx < b.fx) {
                    best = Some(m);
                }
            }
            let best = best.expect("three starts");
            (best.x[0], iterations, best.converged && best.fx.is_finite())
        }
    };

    let fit = profile
        .at(gamma)
        .ok_or_else(|| Error::DegenerateFit(format!("profile likelihood undefined at γ = {gamma}")))?;
    let kappa = -fit.b;
    let mu = if fit.b != 0.0 { -fit.a / fit.b } else { f64::NAN };
    let converged = converged && mu.is_finite();
    Ok(ParamEstimate {
        family: Family::Ckls,
        theta_hat: vec![kappa, mu, fit.sigma2.sqrt(), gamma],
        loglik: fit.loglik,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::fit_ou;
    use crate::rng::SeedStream;
    use crate::sde::{simulate_euler, simulate_ou_exact, to_regression, ModelSpec};

    #[test]
    fn gamma_zero_nests_ou() {
        let mut rng = SeedStream::new(4).rng();
        let path = simulate_ou_exact(2.0, 0.5, 0.4, 2.0, 2000, 0.1, &mut rng).unwrap();
        let ou = fit_ou(&path).unwrap();
        let ck = fit_ckls_with(&to_regression(&path).unwrap(), CklsOptions { gamma: Some(0.0) }).unwrap();
        let d = path.delta();
        let (mu_o, k_o, s_o) = (ou.theta_hat[0], ou.theta_hat[1], ou.theta_hat[2]);
        let (k_c, mu_c, s_c) = (ck.theta_hat[0], ck.theta_hat[1], ck.theta_hat[2]);
        // Same regression, different parametrisations of the AR(1) coefficient
        // and innovation variance.
        let phi_o = (-k_o * d).exp();
        assert!((1.0 - k_c * d - phi_o).abs() < 1e-10);
        assert!((mu_c - mu_o).abs() < 1e-10);
        let var_o = s_o * s_o * (1.0 - phi_o * phi_o) / (2.0 * k_o);
        assert!((s_c * s_c * d - var_o).abs() < 1e-12);
    }

    #[test]
    fn recovers_cir() {
        let truth = [0.5, 2.0, 0.1, 0.5];
        let m = ModelSpec::ckls(truth[0], truth[1], truth[2], truth[3]).unwrap();
        let mut rng = SeedStream::new(8).rng();
        let path = simulate_euler(&m, 2.0, 20_000, 0.1, &mut rng).unwrap();
        let est = fit_ckls(&to_regression(&path).unwrap()).unwrap();
        assert!(est.converged);
        assert!((est.theta_hat[3] - 0.5).abs() < 0.05, "{:?}", est.theta_hat);
        assert!((est.theta_hat[2] - 0.1).abs() < 0.01, "{:?}", est.theta_hat);
    }

    #[test]
    fn rejects_nonpositive_levels() {
        let x: Vec<f64> = (0..25).map(|i| i as f64 - 3.0).collect();
        let s = RegressionSample::new(x, vec![0.1; 25], 0.1).unwrap();
        assert!(matches!(fit_ckls(&s), Err(Error::Domain(_))));
    }
}
