use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::calibrate::{bootstrap_draws, calibrate, BootstrapConfig, NullModel, Resampler};
use super::residuals::{standardize, Covariates, SIGMA_FLOOR};
use super::stats::{glrt_stat_with, marked_process_stats, DcovDesign};
use super::{Calibration, Method, TestResult};
use crate::rng::SeedStream;
use crate::sde::{ModelSpec, RegressionSample};
use crate::smooth::{KernelConfig, KernelMatrix};
use crate::{Error, Result};

/// Diffusion-specification statistics on a fixed design.
///
/// Kernel weights and the double-centred covariate distances depend only on
/// `X`, so they are built once and reused by every bootstrap replicate.
///
/// * ER and NP mark each point with the variance residual
///   `(Y - m_θ̂(X))²Δ - σ²_θ̂(X)` scaled by its sample standard deviation.
/// * GLRT compares the parametric and NW fits of `(ΔX)²/Δ`.
/// * DCOV uses `ε̂` around the NW drift, which keeps the test agnostic
///   about a drift the null does not specify.
#[derive(Debug, Clone)]
pub struct DiffusionSuite {
    methods: Vec<Method>,
    km: KernelMatrix,
    covariates: Covariates,
    dcov: Option<DcovDesign>,
}

impl DiffusionSuite {
    pub fn new(x: &[f64], methods: &[Method], kernel: &KernelConfig) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        let covariates = Covariates::scalar(x.to_vec());
        let dcov = if methods.contains(&Method::Dcov) {
            Some(DcovDesign::new(&covariates)?)
        } else {
            None
        };
        Ok(Self {
            methods: methods.to_vec(),
            km: KernelMatrix::new(x, kernel),
            covariates,
            dcov,
        })
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    pub fn bandwidth(&self) -> f64 {
        self.km.bandwidth()
    }

    /// One statistic per method, in the order given at construction.
    pub fn evaluate(&self, sample: &RegressionSample, fitted: &ModelSpec) -> Result<Vec<f64>> {
        if sample.len() != self.covariates.len() {
            return Err(Error::LengthMismatch(format!(
                "sample {} / design {}",
                sample.len(),
                self.covariates.len()
            )));
        }
        let d = sample.delta();
        let v: Vec<f64> = sample
            .x()
            .iter()
            .zip(sample.y())
            .enumerate()
            .map(|(i, (&x, &y))| {
                let c = y - fitted.drift(x, i as f64 * d);
                c * c * d - fitted.variance(x)
            })
            .collect();
        let uses = |f: fn(&Method) -> bool| self.methods.iter().any(f);
        let marks = if uses(|m| matches!(m, Method::ErKs | Method::ErCvm | Method::Np)) {
            standardize(&v)?
        } else {
            Vec::new()
        };
        let er = if uses(|m| matches!(m, Method::ErKs | Method::ErCvm)) {
            Some(marked_process_stats(&self.covariates, &marks)?)
        } else {
            None
        };
        let mut out = Vec::with_capacity(self.methods.len());
        for m in &self.methods {
            out.push(match m {
                Method::ErKs => er.expect("computed above").0,
                Method::ErCvm => er.expect("computed above").1,
                Method::Np => self.km.off_diagonal_form(&marks),
                Method::Glrt => glrt_stat_with(sample, fitted, &self.km)?,
                Method::Dcov => {
                    let eps = self.dcov_residuals(sample, fitted)?;
                    self.dcov.as_ref().expect("built when DCOV is requested").statistic(&eps)?
                }
            });
        }
        Ok(out)
    }

    /// `ε̂_i = (Y_i - m̂(X_i))√Δ / σ_θ̂(X_i)` with the NW drift `m̂`.
    pub fn dcov_residuals(&self, sample: &RegressionSample, fitted: &ModelSpec) -> Result<Vec<f64>> {
        let sq = sample.delta().sqrt();
        let drift = self.km.smooth(sample.y());
        sample
            .x()
            .iter()
            .zip(sample.y())
            .zip(&drift)
            .enumerate()
            .map(|(i, ((&x, &y), &m))| {
                let s = fitted.diffusion(x);
                if s > SIGMA_FLOOR {
                    Ok((y - m) * sq / s)
                } else {
                    Err(Error::DivisionGuard { index: i, value: s })
                }
            })
            .collect()
    }

    /// Fits `null`, evaluates every method and calibrates them on one
    /// shared set of bootstrap draws. With [`Calibration::Permutation`] the
    /// DCOV row is calibrated by permuting `ε̂` instead; the other methods
    /// always use the bootstrap.
    ///
    /// Randomness comes from `stream.labelled("bootstrap")` and
    /// `stream.labelled("permutation")`.
    pub fn run(
        &self,
        sample: &RegressionSample,
        null: &dyn NullModel,
        config: BootstrapConfig,
        calibration: Calibration,
        stream: SeedStream,
    ) -> Result<Vec<TestResult>> {
        let fitted = null.fit(sample)?;
        let observed = self.evaluate(sample, &fitted)?;
        let permute = calibration == Calibration::Permutation && self.dcov.is_some();
        let needs_bootstrap = self.methods.iter().any(|&m| !(permute && m == Method::Dcov));
        let draws = if needs_bootstrap {
            Some(bootstrap_draws(
                |s, m| self.evaluate(s, m),
                sample,
                null,
                Resampler::Model(&fitted),
                config.b,
                stream.labelled("bootstrap"),
            )?)
        } else {
            None
        };
        let mut out = Vec::with_capacity(self.methods.len());
        for (k, &method) in self.methods.iter().enumerate() {
            let (reps, dropped, cal) = if permute && method == Method::Dcov {
                let eps = self.dcov_residuals(sample, &fitted)?;
                let design = self.dcov.as_ref().expect("built when DCOV is requested");
                (permutation_draws(design, &eps, config.b, stream.labelled("permutation"))?, 0, Calibration::Permutation)
            } else {
                let d = draws.as_ref().expect("bootstrap drawn");
                (d.column(k), d.dropped, Calibration::Bootstrap)
            };
            let (p, crit) = calibrate(observed[k], &reps, config.alpha);
            out.push(TestResult {
                method,
                statistic: observed[k],
                p_value: p,
                critical_value: crit,
                b: config.b,
                dropped,
                alpha: config.alpha,
                calibration: cal,
                seed: None,
            });
        }
        Ok(out)
    }
}

/// DCOV statistics of `b` random permutations of `u` against the design.
pub(crate) fn permutation_draws(design: &DcovDesign, u: &[f64], b: usize, stream: SeedStream) -> Result<Vec<f64>> {
    (0..b)
        .into_par_iter()
        .map(|j| {
            let mut v = u.to_vec();
            v.shuffle(&mut stream.substream(j as u64).rng());
            design.statistic(&v)
        })
        .collect()
}
