use nalgebra::Complex;

use super::ar::{ar_roots, ArDesign};
use super::optim::nelder_mead;
use super::ParamEstimate;
use crate::sde::{CarSpec, Family, Path};
use crate::{Error, Result};

/// A fitted CAR(p) model together with the optimiser report.
#[derive(Debug, Clone)]
pub struct CarFit {
    pub spec: CarSpec,
    /// θ = (α₁, …, α_p, σ).
    pub estimate: ParamEstimate,
}

/// Exact Gaussian log-likelihood of an equally spaced CAR(p) sample, with σ
/// profiled out. Returns `(loglik, σ̂²)`.
///
/// The state starts from its stationary law; the Kalman filter runs on the
/// exact discretisation of the state equation with a noiseless observation
/// `Y = μ + bᵀX`.
pub fn car_log_likelihood(alpha: &[f64], mean: f64, values: &[f64], delta: f64) -> Option<(f64, f64)> {
    let unit = CarSpec::new(alpha.to_vec(), 1.0).ok()?;
    let p = alpha.len();
    let (f, q) = unit.transition(delta);
    let p0 = unit.stationary_covariance();
    let f: Vec<f64> = f.transpose().as_slice().to_vec(); // row-major
    let q: Vec<f64> = q.as_slice().to_vec();
    let mut cov: Vec<f64> = p0.as_slice().to_vec(); // symmetric, layout-agnostic
    let mut state = vec![0.0; p];
    let mut tmp = vec![0.0; p * p];
    let mut sum_sq = 0.0;
    let mut sum_log = 0.0;
    let mut used = 0usize;

    for (k, &y) in values.iter().enumerate() {
        if k > 0 {
            // state ← F state; cov ← F cov Fᵀ + Q
            let mut next = vec![0.0; p];
            for i in 0..p {
                next[i] = (0..p).map(|j| f[i * p + j] * state[j]).sum();
            }
            state = next;
            for i in 0..p {
                for j in 0..p {
                    tmp[i * p + j] = (0..p).map(|l| f[i * p + l] * cov[l * p + j]).sum();
                }
            }
            for i in 0..p {
                for j in 0..p {
                    cov[i * p + j] = (0..p).map(|l| tmp[i * p + l] * f[j * p + l]).sum::<f64>() + q[i * p + j];
                }
            }
        }
        let v = y - mean - state[0];
        let s = cov[0];
        if !(s > 0.0 && s.is_finite()) {
            return None;
        }
        sum_sq += v * v / s;
        sum_log += s.ln();
        used += 1;
        // Condition on the observation of the first state component.
        let gain: Vec<f64> = (0..p).map(|i| cov[i * p] / s).collect();
        let row0: Vec<f64> = (0..p).map(|j| cov[j]).collect();
        for i in 0..p {
            state[i] += gain[i] * v;
            for j in 0..p {
                cov[i * p + j] -= gain[i] * row0[j];
            }
        }
        // The first component is now known exactly.
        for j in 0..p {
            cov[j] = 0.0;
            cov[j * p] = 0.0;
        }
    }
    let n = used as f64;
    let sigma2 = sum_sq / n;
    let loglik = -0.5 * (n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) + sum_log);
    Some((loglik, sigma2))
}

/// Maps discrete AR roots `z` to continuous roots `log z / Δ` and returns the
/// coefficients of `Π(s - λ_j)` below the leading one.
fn continuous_coefficients(roots: &[Complex<f64>], delta: f64) -> Result<Vec<f64>> {
    let mut lambdas = Vec::with_capacity(roots.len());
    let mut pending: Vec<Complex<f64>> = Vec::new();
    for &z in roots {
        if z.norm() >= 1.0 {
            return Err(Error::NonstationaryFit(format!("discrete root {z} on or outside the unit circle")));
        }
        if z.im.abs() <= 1e-12 * z.norm().max(1e-300) {
            if z.re <= 0.0 {
                return Err(Error::MappingFailed(format!(
                    "real root {} has no real logarithm",
                    z.re
                )));
            }
            lambdas.push(Complex::new(z.re.ln() / delta, 0.0));
        } else {
            pending.push(z);
        }
    }
    // Conjugate pairs, matched in ascending order of imaginary part.
    pending.sort_by(|a, b| a.im.total_cmp(&b.im));
    while let Some(z) = pending.pop() {
        let partner = pending
            .iter()
            .position(|w| (w - z.conj()).norm() <= 1e-8 * z.norm())
            .ok_or_else(|| Error::MappingFailed(format!("root {z} has no conjugate partner")))?;
        let w = pending.remove(partner);
        let l = z.ln() / delta;
        lambdas.push(l);
        lambdas.push(w.ln() / delta);
    }
    // Expand Π(s - λ_j).
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for l in &lambdas {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * l;
        }
        poly = next;
    }
    Ok(poly[1..].iter().map(|c| c.re).collect())
}

/// Fits a CAR(p) model to an equally spaced sample.
///
/// The discrete AR(p) least-squares fit supplies characteristic roots `z_j`,
/// mapped to `λ_j = log z_j / Δ`. For `p = 1` this is the exact conditional
/// MLE. For `p ≥ 2` the sampled process is ARMA(p, p-1), so the mapped
/// coefficients only start a simplex search of the exact state-space
/// likelihood.
pub fn fit_car(path: &Path, p: usize) -> Result<CarFit> {
    let values = path.values();
    if p == 0 {
        return Err(Error::invalid("CAR order must be at least 1"));
    }
    if values.len() < 10 * p {
        return Err(Error::invalid(format!(
            "CAR({p}) needs at least {} observations, got {}",
            10 * p,
            values.len()
        )));
    }
    let delta = path.delta();
    let ar = ArDesign::new(values, p)?.fit();
    let alpha0 = continuous_coefficients(&ar_roots(&ar.phi), delta)?;

    if p == 1 {
        let phi = ar.phi[0];
        let a = alpha0[0];
        let sigma2 = ar.sigma2 * 2.0 * a / (1.0 - phi * phi);
        let mean = ar.intercept / (1.0 - phi);
        let spec = CarSpec::new(alpha0.clone(), sigma2.sqrt())?.with_mean(mean);
        let n = ar.residuals.len() as f64;
        return Ok(CarFit {
            spec,
            estimate: ParamEstimate {
                family: Family::Custom,
                theta_hat: vec![a, sigma2.sqrt()],
                loglik: -0.5 * n * ((2.0 * std::f64::consts::PI * ar.sigma2).ln() + 1.0),
                converged: true,
                iterations: 0,
            },
        });
    }

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    CarSpec::new(alpha0.clone(), 1.0).map_err(|e| Error::NonstationaryFit(e.to_string()))?;
    let objective = |a: &[f64]| car_log_likelihood(a, mean, values, delta).map_or(f64::INFINITY, |(l, _)| -l);
    let step: Vec<f64> = alpha0.iter().map(|a| 0.1 * a.abs() + 0.05).collect();
    let mut m = nelder_mead(objective, &alpha0, &step, 1e-8, 2000);
    let mut iterations = m.iterations;
    // One restart from the optimum guards against premature simplex collapse.
    let step2: Vec<f64> = m.x.iter().map(|a| 0.05 * a.abs() + 0.01).collect();
    let m2 = nelder_mead(objective, &m.x.clone(), &step2, 1e-8, 2000);
    iterations += m2.iterations;
    if m2.fx <= m.fx {
        m = m2;
    }
    let (loglik, sigma2) = car_log_likelihood(&m.x, mean, values, delta)
        .ok_or_else(|| Error::NonstationaryFit("optimum left the stationary region".into()))?;
    let spec = CarSpec::new(m.x.clone(), sigma2.sqrt())?.with_mean(mean);
    let mut theta_hat = m.x;
    theta_hat.push(sigma2.sqrt());
    Ok(CarFit {
        spec,
        estimate: ParamEstimate {
            family: Family::Custom,
            theta_hat,
            loglik,
            converged: m.converged,
            iterations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::fit_ou;
    use crate::rng::SeedStream;
    use crate::sde::{simulate_car, simulate_ou_exact};

    #[test]
    fn order_one_matches_ou() {
        let mut rng = SeedStream::new(31).rng();
        let path = simulate_ou_exact(0.0, 0.5, 0.5, 0.0, 5000, 0.2, &mut rng).unwrap();
        let car = fit_car(&path, 1).unwrap();
        let ou = fit_ou(&path).unwrap();
        assert!((car.spec.alpha()[0] - ou.theta_hat[1]).abs() < 1e-6);
        assert!((car.spec.sigma() - ou.theta_hat[2]).abs() < 1e-6);
    }

    #[test]
    fn complex_roots_map_in_pairs() {
        // λ = -0.3 ± 0.8i ⇒ s² + 0.6 s + 0.73
        let d = 0.5;
        let lam = Complex::new(-0.3, 0.8);
        let z = (lam * d).exp();
        let a = continuous_coefficients(&[z, z.conj()], d).unwrap();
        assert!((a[0] - 0.6).abs() < 1e-12 && (a[1] - 0.73).abs() < 1e-12, "{a:?}");
    }

    #[test]
    fn negative_real_root_fails() {
        assert!(matches!(
            continuous_coefficients(&[Complex::new(-0.5, 0.0)], 1.0),
            Err(Error::MappingFailed(_))
        ));
    }

    #[test]
    fn explosive_root_is_nonstationary() {
        let mut rng = SeedStream::new(2).rng();
        let mut x = vec![1.0];
        for _ in 0..500 {
            let last = *x.last().unwrap();
            x.push(1.01 * last + crate::rng::std_normal(&mut rng));
        }
        let path = Path::new(1.0, x).unwrap();
        assert!(matches!(fit_car(&path, 1), Err(Error::NonstationaryFit(_))));
    }

    #[test]
    fn likelihood_prefers_truth() {
        let spec = CarSpec::new(vec![1.2, 0.32], 1.0).unwrap();
        let path = simulate_car(&spec, 3000, 0.5, &mut SeedStream::new(6).rng()).unwrap();
        let at = |a: &[f64]| car_log_likelihood(a, 0.0, path.values(), 0.5).unwrap().0;
        assert!(at(&[1.2, 0.32]) > at(&[0.7, 0.2]));
        assert!(at(&[1.2, 0.32]) > at(&[2.0, 0.5]));
    }
}
