use rayon::prelude::*;

use super::stats::DcovDesign;
use super::suite::permutation_draws;
use super::{Calibration, Method, Residuals, TestResult};
use crate::estimate::{fit_ckls, fit_ou, fit_scale_diffusion};
use crate::rng::{normals, SeedStream};
use crate::sde::{ModelSpec, RegressionSample};
use crate::{Error, Result};

/// Maximum share of bootstrap replicates that may fail before the
/// calibration is abandoned.
pub const MAX_DROPPED_SHARE: f64 = 0.05;

/// Re-estimation of the null model on a (resampled) regression sample.
pub trait NullModel: Sync {
    fn fit(&self, sample: &RegressionSample) -> Result<ModelSpec>;
}

/// The registered parametric nulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullFamily {
    /// `σ²(x) = σ²x²`, fitted by the quadratic-variation ratio.
    ScaleDiffusion,
    /// CKLS by Euler pseudo-likelihood.
    Ckls,
    /// OU by exact likelihood.
    Ou,
}

impl NullModel for NullFamily {
    fn fit(&self, sample: &RegressionSample) -> Result<ModelSpec> {
        let est = match self {
            NullFamily::ScaleDiffusion => fit_scale_diffusion(sample)?,
            NullFamily::Ckls => {
                let est = fit_ckls(sample)?;
                if !est.converged {
                    return Err(Error::DegenerateFit("CKLS optimiser did not converge".into()));
                }
                est
            }
            NullFamily::Ou => fit_ou(&sample.reconstruct())?,
        };
        est.model()
    }
}

impl<F> NullModel for F
where
    F: Fn(&RegressionSample) -> Result<ModelSpec> + Sync,
{
    fn fit(&self, sample: &RegressionSample) -> Result<ModelSpec> {
        self(sample)
    }
}

/// `p = #{T* ≥ T} / B` over the surviving replicates, and the
/// `⌈B(1-α)⌉`-th order statistic as critical value.
pub fn calibrate(statistic: f64, replicates: &[f64], alpha: f64) -> (f64, f64) {
    let b = replicates.len();
    if b == 0 {
        return (f64::NAN, f64::NAN);
    }
    let exceed = replicates.iter().filter(|&&t| t >= statistic).count();
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((b as f64 * (1.0 - alpha)).ceil() as usize).clamp(1, b);
    (exceed as f64 / b as f64, sorted[k - 1])
}

/// Fixed-design parametric resample `Y* = m(X, θ̂) + σ(X, θ̂) Δ^{-1/2} ε*`.
pub fn resample(sample: &RegressionSample, fitted: &ModelSpec, eps: &[f64]) -> Result<RegressionSample> {
    let d = sample.delta();
    let inv = 1.0 / d.sqrt();
    let y = sample
        .x()
        .iter()
        .zip(eps)
        .enumerate()
        .map(|(i, (&x, &e))| fitted.drift(x, i as f64 * d) + fitted.diffusion(x) * inv * e)
        .collect();
    sample.with_response(y)
}

/// How bootstrap responses are generated on the fixed design.
#[derive(Debug, Clone, Copy)]
pub enum Resampler<'a> {
    /// Drift and diffusion of the fitted model.
    Model(&'a ModelSpec),
    /// A precomputed drift at each design point (for instance a kernel
    /// plug-in) with the diffusion of the fitted model.
    PluginDrift { drift: &'a [f64], model: &'a ModelSpec },
}

impl Resampler<'_> {
    pub fn draw(&self, sample: &RegressionSample, eps: &[f64]) -> Result<RegressionSample> {
        match *self {
            Resampler::Model(m) => resample(sample, m, eps),
            Resampler::PluginDrift { drift, model } => {
                let inv = 1.0 / sample.delta().sqrt();
                let y = sample
                    .x()
                    .iter()
                    .zip(eps)
                    .zip(drift)
                    .map(|((&x, &e), &m)| m + model.diffusion(x) * inv * e)
                    .collect();
                sample.with_response(y)
            }
        }
    }
}

/// Successful replicate statistics and the number of failed replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    /// One vector of statistics per surviving replicate.
    pub replicates: Vec<Vec<f64>>,
    pub dropped: usize,
    pub requested: usize,
}

impl BootstrapDraws {
    /// Replicate values of statistic `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.replicates.iter().map(|r| r[k]).collect()
    }
}

/// Runs `b` bootstrap replicates: draw responses on the fixed design,
/// re-estimate with `null`, evaluate `statistics`. Replicate `j` draws from
/// `stream.substream(j)`, so results do not depend on scheduling.
pub fn bootstrap_draws<S>(
    statistics: S,
    sample: &RegressionSample,
    null: &dyn NullModel,
    resampler: Resampler<'_>,
    b: usize,
    stream: SeedStream,
) -> Result<BootstrapDraws>
where
    S: Fn(&RegressionSample, &ModelSpec) -> Result<Vec<f64>> + Sync,
{
    let n = sample.len();
    let outcomes: Vec<Result<Vec<f64>>> = (0..b)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream.substream(j as u64).rng();
            let eps = normals(&mut rng, n);
            let star = resampler.draw(sample, &eps)?;
            let refit = null.fit(&star)?;
            let t = statistics(&star, &refit)?;
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateFit("non-finite replicate statistic".into()));
            }
            Ok(t)
        })
        .collect();
    let mut replicates = Vec::with_capacity(b);
    let mut dropped = 0;
    for o in outcomes {
        match o {
            Ok(t) => replicates.push(t),
            Err(_) => dropped += 1,
        }
    }
    if dropped as f64 > MAX_DROPPED_SHARE * b as f64 {
        return Err(Error::CalibrationUnstable { dropped, requested: b });
    }
    Ok(BootstrapDraws {
        replicates,
        dropped,
        requested: b,
    })
}

/// Bootstrap settings shared by the calibration routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub b: usize,
    pub alpha: f64,
}

impl BootstrapConfig {
    pub fn new(b: usize, alpha: f64) -> Result<Self> {
        if b < 100 {
            return Err(Error::invalid(format!("need at least 100 replicates, got {b}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { b, alpha })
    }
}

/// Parametric bootstrap calibration of a single statistic.
pub fn parametric_bootstrap<S>(
    method: Method,
    statistic: S,
    sample: &RegressionSample,
    null: &dyn NullModel,
    fitted: &ModelSpec,
    config: BootstrapConfig,
    stream: SeedStream,
) -> Result<TestResult>
where
    S: Fn(&RegressionSample, &ModelSpec) -> Result<f64> + Sync,
{
    let t = statistic(sample, fitted)?;
    let draws = bootstrap_draws(
        |s, m| statistic(s, m).map(|v| vec![v]),
        sample,
        null,
        Resampler::Model(fitted),
        config.b,
        stream,
    )?;
    let (p, crit) = calibrate(t, &draws.column(0), config.alpha);
    Ok(TestResult {
        method,
        statistic: t,
        p_value: p,
        critical_value: crit,
        b: config.b,
        dropped: draws.dropped,
        alpha: config.alpha,
        calibration: Calibration::Bootstrap,
        seed: None,
    })
}

/// Permutation calibration of the distance-covariance statistic: `ε̂` is
/// shuffled against the fixed covariates.
pub fn permutation_pvalue(residuals: &Residuals, config: BootstrapConfig, stream: SeedStream) -> Result<TestResult> {
    let design = DcovDesign::new(residuals.covariates())?;
    let eps = residuals.eps_hat();
    let t = design.statistic(eps)?;
    let reps = permutation_draws(&design, eps, config.b, stream)?;
    let (p, crit) = calibrate(t, &reps, config.alpha);
    Ok(TestResult {
        method: Method::Dcov,
        statistic: t,
        p_value: p,
        critical_value: crit,
        b: config.b,
        dropped: 0,
        alpha: config.alpha,
        calibration: Calibration::Permutation,
        seed: None,
    })
}
