use super::Path;
use crate::{Error, Result};

/// Regression form of a discretely sampled diffusion: pairs `(X_{t_i}, Y_{t_i})`
/// with `Y_{t_i} = (X_{t_{i+1}} - X_{t_i}) / Δ`, `i = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    x: Vec<f64>,
    y: Vec<f64>,
    delta: f64,
}

impl RegressionSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>, delta: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(format!("{} covariates, {} responses", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::invalid("empty regression sample"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { x, y, delta })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Same covariates with a new response vector (fixed-design resampling).
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.delta)
    }

    /// `X_{t_{i+1}} - X_{t_i} = Y_{t_i} Δ`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.y.iter().map(move |y| y * self.delta)
    }

    /// Squared scaled increments `(X_{t_{i+1}} - X_{t_i})² / Δ`.
    pub fn squared_scaled(&self) -> Vec<f64> {
        self.increments().map(|d| d * d / self.delta).collect()
    }

    /// Rebuilds the path `X_{t_{i+1}} = X_{t_i} + Y_{t_i} Δ` from the first
    /// covariate.
    pub fn reconstruct(&self) -> Path {
        let mut values = Vec::with_capacity(self.len() + 1);
        let mut x = self.x[0];
        values.push(x);
        for d in self.increments() {
            x += d;
            values.push(x);
        }
        Path::new(self.delta, values).expect("delta validated on construction")
    }
}

/// Converts a path into its regression pairs.
pub fn to_regression(path: &Path) -> Result<RegressionSample> {
    let v = path.values();
    if v.len() < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    let delta = path.delta();
    let y = v.windows(2).map(|w| (w[1] - w[0]) / delta).collect();
    RegressionSample::new(v[..v.len() - 1].to_vec(), y, delta)
}
