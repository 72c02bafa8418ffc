use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{Path, BURN_IN};
use crate::numeric::{expm, lyapunov};
use crate::rng::std_normal;
use crate::{Error, Result};

/// Continuous-time Gaussian autoregression of order `p`,
///
/// ```text
/// Y^(p) + α₁ Y^(p-1) + … + α_p Y = σ W'
/// ```
///
/// in state-space form `dX = A X dt + σ e dW`, `Y = μ + bᵀX`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarSpec {
    alpha: Vec<f64>,
    sigma: f64,
    mean: f64,
}

impl CarSpec {
    /// Fails unless every eigenvalue of the companion matrix has negative
    /// real part.
    pub fn new(alpha: Vec<f64>, sigma: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("CAR order must be at least 1"));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("CAR coefficients must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let spec = Self {
            alpha,
            sigma,
            mean: 0.0,
        };
        let worst = spec
            .eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst >= 0.0 {
            return Err(Error::invalid(format!(
                "companion matrix has an eigenvalue with real part {worst}"
            )));
        }
        Ok(spec)
    }

    /// Shifts the observed process to mean `mean`.
    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Ones on the superdiagonal, last row `(-α_p, …, -α₁)`.
    pub fn companion(&self) -> DMatrix<f64> {
        companion(&self.alpha)
    }

    pub fn eigenvalues(&self) -> Vec<nalgebra::Complex<f64>> {
        self.companion().complex_eigenvalues().iter().copied().collect()
    }

    /// `e^{AΔ}` and `Q(Δ) = ∫₀^Δ e^{Au} σ²eeᵀ e^{Aᵀu} du`.
    pub fn transition(&self, delta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        transition(&self.companion(), self.sigma * self.sigma, delta)
    }

    /// Stationary covariance of the state vector.
    pub fn stationary_covariance(&self) -> DMatrix<f64> {
        let p = self.order();
        let mut g = DMatrix::zeros(p, p);
        g[(p - 1, p - 1)] = self.sigma * self.sigma;
        lyapunov(&self.companion(), &g).expect("stable companion matrix has a Lyapunov solution")
    }
}

pub(crate) fn companion(alpha: &[f64]) -> DMatrix<f64> {
    let p = alpha.len();
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..p {
        a[(p - 1, j)] = -alpha[p - 1 - j];
    }
    a
}

/// Block-exponential evaluation of the exact discretisation.
///
/// With `M = [[-A, s²eeᵀ], [0, Aᵀ]] Δ`, `exp(M) = [[·, E₁₂], [0, E₂₂]]`,
/// `e^{AΔ} = E₂₂ᵀ` and `Q = E₂₂ᵀ E₁₂`.
pub(crate) fn transition(a: &DMatrix<f64>, s2: f64, delta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = a.nrows();
    let mut m = DMatrix::zeros(2 * p, 2 * p);
    m.view_mut((0, 0), (p, p)).copy_from(&(-a));
    m[(p - 1, 2 * p - 1)] = s2;
    m.view_mut((p, p), (p, p)).copy_from(&a.transpose());
    let e = expm(&(m * delta));
    let f = e.view((p, p), (p, p)).transpose();
    let q = &f * e.view((0, p), (p, p));
    let q = (&q + q.transpose()) * 0.5;
    (f, q)
}

/// A square root `L` with `L Lᵀ = S` for a symmetric positive semidefinite
/// `S`; tiny negative eigenvalues from round-off are clipped.
pub(crate) fn psd_factor(s: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(c) = s.clone().cholesky() {
        return c.l();
    }
    let eig = s.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d)
}

/// Exact simulation of `Y = μ + bᵀX` at spacing `delta`.
///
/// The state starts from its stationary law and the first 1000 observations
/// are discarded.
pub fn simulate_car<R: Rng + ?Sized>(spec: &CarSpec, n: usize, delta: f64, rng: &mut R) -> Result<Path> {
    if n == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let p = spec.order();
    let (f, q) = spec.transition(delta);
    let lq = psd_factor(&q);
    let lp = psd_factor(&spec.stationary_covariance());

    let draw = |rng: &mut R| DVector::from_iterator(p, (0..p).map(|_| std_normal(rng)));
    let mut state = &lp * draw(rng);
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..BURN_IN + n + 1 {
        if k > 0 {
            state = &f * &state + &lq * draw(rng);
        }
        if k >= BURN_IN {
            values.push(spec.mean + state[0]);
        }
    }
    Path::new(delta, values)
}
