use rand::Rng;

use super::{Path, BURN_IN};
use crate::rng::std_normal;
use crate::sde::EXPLOSION_BOUND;
use crate::{Error, Result};

/// Euler substeps per observation interval.
pub const CTAR_SUBSTEPS: usize = 10;

/// Two-regime threshold autoregression with unit diffusion,
///
/// ```text
/// dY = α_j (μ_j - Y) dt + dW,   j = 1 if Y ≤ r, else 2.
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ctar1Spec {
    pub mu1: f64,
    pub alpha1: f64,
    pub mu2: f64,
    pub alpha2: f64,
    pub r: f64,
}

impl Ctar1Spec {
    pub fn drift(&self, y: f64) -> f64 {
        if y <= self.r {
            self.alpha1 * (self.mu1 - y)
        } else {
            self.alpha2 * (self.mu2 - y)
        }
    }
}

/// Euler simulation on a grid ten times finer than `delta`, subsampled back.
///
/// Starts at the threshold and discards the first 1000 observations.
pub fn simulate_ctar1<R: Rng + ?Sized>(spec: &Ctar1Spec, n: usize, delta: f64, rng: &mut R) -> Result<Path> {
    if n == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let h = delta / CTAR_SUBSTEPS as f64;
    let sq = h.sqrt();
    let mut y = spec.r;
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..BURN_IN + n + 1 {
        if k > 0 {
            for _ in 0..CTAR_SUBSTEPS {
                y += spec.drift(y) * h + sq * std_normal(rng);
            }
            if !y.is_finite() || y.abs() > EXPLOSION_BOUND {
                return Err(Error::SimulationDiverged {
                    step: k * CTAR_SUBSTEPS,
                    value: y,
                });
            }
        }
        if k >= BURN_IN {
            values.push(y);
        }
    }
    Path::new(delta, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    const PAPER: Ctar1Spec = Ctar1Spec {
        mu1: 4.0,
        alpha1: 0.5,
        mu2: -1.25,
        alpha2: -0.4,
        r: 1.0,
    };

    #[test]
    fn boundary_belongs_to_regime_one() {
        assert_eq!(PAPER.drift(1.0), 0.5 * (4.0 - 1.0));
        assert_eq!(PAPER.drift(1.0 + 1e-12), -0.4 * (-1.25 - (1.0 + 1e-12)));
    }

    #[test]
    fn paper_parameters_simulate() {
        let mut rng = SeedStream::new(5).rng();
        let p = simulate_ctar1(&PAPER, 100, 0.01, &mut rng).unwrap();
        assert_eq!(p.values().len(), 101);
        assert!(p.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn coinciding_regimes_are_ou() {
        let spec = Ctar1Spec {
            mu1: 0.5,
            alpha1: 1.0,
            mu2: 0.5,
            alpha2: 1.0,
            r: 0.0,
        };
        let mut rng = SeedStream::new(9).rng();
        // Spacing 2 keeps successive draws nearly independent (ρ = e^{-2}).
        let y = simulate_ctar1(&spec, 10_000, 2.0, &mut rng).unwrap().into_values();
        let n = y.len() as f64;
        let m = y.iter().sum::<f64>() / n;
        let v = y.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        // Stationary law N(0.5, 1/2); inflate SEs for the residual correlation.
        let infl = ((1.0 + (-2.0f64).exp()) / (1.0 - (-2.0f64).exp())).sqrt();
        assert!((m - 0.5).abs() < 3.0 * infl * (0.5 / n).sqrt(), "mean {m}");
        // The Euler grid h = 0.2 shrinks the stationary variance to 1/(2 - h).
        let want = 1.0 / (2.0 - 0.2);
        assert!((v - want).abs() < 3.0 * infl * want * (2.0 / n).sqrt(), "var {v}");
    }
}
