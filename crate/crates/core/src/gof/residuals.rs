use crate::sde::{ModelSpec, RegressionSample};
use crate::smooth::{nw_drift, KernelConfig, KernelMatrix};
use crate::{Error, Result};

/// Diffusion values below this are treated as zero when standardising.
pub const SIGMA_FLOOR: f64 = 1e-10;

/// Covariate rows of a common dimension `p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    dim: usize,
    data: Vec<f64>,
}

impl Covariates {
    pub fn scalar(x: Vec<f64>) -> Self {
        Self { dim: 1, data: x }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::LengthMismatch("covariate rows differ in length".into()));
        }
        Ok(Self {
            dim,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// The covariate values when `p = 1`.
    pub fn as_scalar(&self) -> Option<&[f64]> {
        (self.dim == 1).then_some(&self.data[..])
    }

    /// `x_i ≤ x_j` componentwise.
    #[inline]
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.row(i).iter().zip(self.row(j)).all(|(a, b)| a <= b)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            return (self.data[i] - self.data[j]).abs();
        }
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// How the drift enters the standardised residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftMode {
    /// `m(x, θ̂)` of the fitted model.
    Parametric,
    /// Nadaraya–Watson plug-in at the given bandwidth.
    Kernel(KernelConfig),
}

/// Residuals of a fitted diffusion:
///
/// ```text
/// ε̂_i = (Y_i - m(X_i)) √Δ / σ_θ̂(X_i),     v_i = (Y_i - m_θ̂(X_i))² Δ - σ²_θ̂(X_i)
/// ```
///
/// `m` in `ε̂` is the parametric or kernel drift; the variance residual
/// always centres at the fitted parametric drift. Leaving the drift in
/// (`(ΔX)²/Δ`) biases the marks by `m²Δ`, which the bootstrap world
/// inflates through the noise in `κ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    eps_hat: Vec<f64>,
    v_hat: Vec<f64>,
    covariates: Covariates,
}

impl Residuals {
    pub fn new(eps_hat: Vec<f64>, v_hat: Vec<f64>, covariates: Covariates) -> Result<Self> {
        if eps_hat.len() != v_hat.len() || eps_hat.len() != covariates.len() {
            return Err(Error::LengthMismatch(format!(
                "eps {} / v {} / covariates {}",
                eps_hat.len(),
                v_hat.len(),
                covariates.len()
            )));
        }
        if let Some(i) = eps_hat.iter().chain(&v_hat).chain(&covariates.data).position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite residual or covariate (entry {i})")));
        }
        Ok(Self {
            eps_hat,
            v_hat,
            covariates,
        })
    }

    pub fn eps_hat(&self) -> &[f64] {
        &self.eps_hat
    }

    pub fn v_hat(&self) -> &[f64] {
        &self.v_hat
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn len(&self) -> usize {
        self.eps_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps_hat.is_empty()
    }

    /// Variance residuals divided by their sample standard deviation.
    pub fn variance_marks(&self) -> Result<Vec<f64>> {
        standardize(&self.v_hat)
    }

    /// Standardised residuals divided by their sample standard deviation.
    pub fn drift_marks(&self) -> Result<Vec<f64>> {
        standardize(&self.eps_hat)
    }
}

/// `v / sd(v)`; fails on zero variance.
pub fn standardize(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() < 2 {
        return Err(Error::DegenerateMarks);
    }
    let sd = crate::numeric::variance(v).sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::DegenerateMarks);
    }
    Ok(v.iter().map(|x| x / sd).collect())
}

fn drift_values(sample: &RegressionSample, model: &ModelSpec, mode: DriftMode) -> Result<Vec<f64>> {
    let d = sample.delta();
    match mode {
        DriftMode::Parametric => Ok(sample
            .x()
            .iter()
            .enumerate()
            .map(|(i, &x)| model.drift(x, i as f64 * d))
            .collect()),
        DriftMode::Kernel(c) => sample.x().iter().map(|&x| nw_drift(sample, x, &c)).collect(),
    }
}

/// Residuals of `sample` under the fitted model `model`.
pub fn residuals(sample: &RegressionSample, model: &ModelSpec, mode: DriftMode) -> Result<Residuals> {
    let drift = drift_values(sample, model, mode)?;
    residuals_with_drift(sample, model, &drift)
}

/// As [`residuals`] with a precomputed NW drift from a [`KernelMatrix`] on
/// the sample's own covariates.
pub fn residuals_kernel(sample: &RegressionSample, model: &ModelSpec, km: &KernelMatrix) -> Result<Residuals> {
    let drift = km.smooth(sample.y());
    residuals_with_drift(sample, model, &drift)
}

fn residuals_with_drift(sample: &RegressionSample, model: &ModelSpec, drift: &[f64]) -> Result<Residuals> {
    let d = sample.delta();
    let sq = d.sqrt();
    let n = sample.len();
    let mut eps = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for (i, (&x, &y)) in sample.x().iter().zip(sample.y()).enumerate() {
        let s = model.diffusion(x);
        let c = y - model.drift(x, i as f64 * d);
        if !(s > SIGMA_FLOOR) {
            return Err(Error::DivisionGuard { index: i, value: s });
        }
        eps.push((y - drift[i]) * sq / s);
        v.push(c * c * d - model.variance(x));
    }
    Residuals::new(eps, v, Covariates::scalar(sample.x().to_vec()))
}
