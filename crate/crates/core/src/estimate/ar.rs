use nalgebra::{DMatrix, DVector};

use crate::sde::companion;
use crate::{Error, Result};

/// Fixed design for a discrete AR(p) regression with intercept,
/// `X_t = c + φ₁X_{t-1} + … + φ_pX_{t-p} + η_t`.
///
/// The lag matrix is factorised once so responses can be refitted cheaply,
/// as a fixed-design bootstrap requires.
#[derive(Debug, Clone)]
pub struct ArDesign {
    p: usize,
    /// Row `i` holds `(X_{t-1}, …, X_{t-p})` for response `X_t`, `t = p + i`.
    lags: Vec<Vec<f64>>,
    response: Vec<f64>,
    full: Solver,
    /// Unit-root boundary: `X_t - X_{t-1}` on an intercept and
    /// `X_{t-j} - X_{t-j-1}`, `j = 1..p-1`.
    boundary: Solver,
}

#[derive(Debug, Clone)]
struct Solver {
    design: DMatrix<f64>,
    /// `(DᵀD)⁻¹Dᵀ`
    pinv: DMatrix<f64>,
}

impl Solver {
    fn new(design: DMatrix<f64>) -> Result<Self> {
        let gram = design.transpose() * &design;
        let inv = gram
            .try_inverse()
            .ok_or_else(|| Error::degenerate("AR design matrix is rank deficient"))?;
        let pinv = inv * design.transpose();
        if pinv.iter().any(|v| !v.is_finite()) {
            return Err(Error::degenerate("AR design matrix is rank deficient"));
        }
        Ok(Self { design, pinv })
    }

    fn solve(&self, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let beta = &self.pinv * y;
        let fitted = &self.design * &beta;
        (beta, fitted)
    }
}

/// Least-squares AR(p) fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub intercept: f64,
    pub phi: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance `RSS / N`.
    pub sigma2: f64,
    /// Whether the unconstrained fit was nonstationary and the unit-root
    /// fit was used instead.
    pub constrained: bool,
}

impl ArFit {
    /// Moduli of the roots of `z^p - φ₁z^{p-1} - … - φ_p`.
    pub fn root_moduli(&self) -> Vec<f64> {
        ar_roots(&self.phi).iter().map(|z| z.norm()).collect()
    }

    pub fn is_stationary(&self) -> bool {
        self.root_moduli().iter().all(|&m| m < 1.0)
    }
}

pub(crate) fn ar_roots(phi: &[f64]) -> Vec<nalgebra::Complex<f64>> {
    // The companion of the continuous form with α_j = -φ_j has the discrete
    // characteristic polynomial.
    let neg: Vec<f64> = phi.iter().map(|v| -v).collect();
    companion(&neg).complex_eigenvalues().iter().copied().collect()
}

impl ArDesign {
    pub fn new(series: &[f64], p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("AR order must be at least 1"));
        }
        if series.len() < 2 * p + 2 {
            return Err(Error::invalid(format!(
                "series of length {} too short for AR({p})",
                series.len()
            )));
        }
        let rows = series.len() - p;
        let lags: Vec<Vec<f64>> = (0..rows)
            .map(|i| (1..=p).map(|j| series[p + i - j]).collect())
            .collect();
        let response = series[p..].to_vec();

        let full = DMatrix::from_fn(rows, p + 1, |i, j| if j == 0 { 1.0 } else { lags[i][j - 1] });
        let boundary = DMatrix::from_fn(rows, p, |i, j| {
            if j == 0 {
                1.0
            } else {
                lags[i][j - 1] - lags[i][j]
            }
        });
        Ok(Self {
            p,
            full: Solver::new(full)?,
            boundary: Solver::new(boundary)?,
            lags,
            response,
        })
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Lag vectors `(X_{t-1}, …, X_{t-p})`, one per response.
    pub fn lags(&self) -> &[Vec<f64>] {
        &self.lags
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Unconstrained least squares on the observed response.
    pub fn fit(&self) -> ArFit {
        self.fit_response(&self.response)
    }

    pub fn fit_response(&self, y: &[f64]) -> ArFit {
        let yv = DVector::from_column_slice(y);
        let (beta, fitted) = self.full.solve(&yv);
        finish(y, beta[0], beta.iter().skip(1).copied().collect(), fitted, false)
    }

    /// Least squares with a nonstationarity guard: when the unconstrained fit
    /// has a root on or outside the unit circle, refit with a unit root
    /// imposed, which keeps an explosive sample from being fitted by an
    /// explosive recursion in the dominant root.
    pub fn fit_guarded(&self) -> ArFit {
        self.fit_guarded_response(&self.response)
    }

    pub fn fit_guarded_response(&self, y: &[f64]) -> ArFit {
        let free = self.fit_response(y);
        if free.is_stationary() {
            return free;
        }
        let p = self.p;
        let dy = DVector::from_fn(y.len(), |i, _| y[i] - self.lags[i][0]);
        let (g, fitted_d) = self.boundary.solve(&dy);
        let fitted = DVector::from_fn(y.len(), |i, _| self.lags[i][0] + fitted_d[i]);
        // φ₁ = 1 + g₁, φ_j = g_j - g_{j-1}, φ_p = -g_{p-1}
        let mut phi = vec![0.0; p];
        phi[0] = 1.0;
        for j in 1..p {
            phi[j - 1] += g[j];
            phi[j] -= g[j];
        }
        finish(y, g[0], phi, fitted, true)
    }
}

fn finish(y: &[f64], intercept: f64, phi: Vec<f64>, fitted: DVector<f64>, constrained: bool) -> ArFit {
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let sigma2 = residuals.iter().map(|r| r * r).sum::<f64>() / y.len() as f64;
    ArFit {
        intercept,
        phi,
        fitted: fitted.iter().copied().collect(),
        residuals,
        sigma2,
        constrained,
    }
}

/// Unconstrained AR(p) least squares with intercept.
pub fn fit_ar(series: &[f64], p: usize) -> Result<ArFit> {
    Ok(ArDesign::new(series, p)?.fit())
}
