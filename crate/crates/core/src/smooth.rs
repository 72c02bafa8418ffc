//! Gaussian-kernel estimators of the marginal density, drift and diffusion
//! functions, bandwidth selection and pointwise confidence bands.

use std::io::{self, Write};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::sde::{fmt_full, RegressionSample};
use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `∫K² = 1/(2√π)` for the Gaussian kernel.
pub const GAUSSIAN_ROUGHNESS: f64 = 0.282_094_791_773_878_14;

/// Gaussian kernel `K(u) = (2π)^{-1/2} e^{-u²/2}`.
#[inline]
pub fn gaussian(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    bandwidth: f64,
}

impl KernelConfig {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Self { bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn roughness(&self) -> f64 {
        GAUSSIAN_ROUGHNESS
    }

    #[inline]
    fn weight(&self, x: f64, xi: f64) -> f64 {
        gaussian((x - xi) / self.bandwidth)
    }
}

/// `π_nh(x) = n⁻¹ Σ h⁻¹ K((x - X_i)/h)`.
pub fn kde(data: &[f64], x: f64, config: &KernelConfig) -> f64 {
    let h = config.bandwidth;
    data.iter().map(|&xi| config.weight(x, xi)).sum::<f64>() / (data.len() as f64 * h)
}

/// `(Σ K_i v_i, Σ K_i)` with `K_i = K((x - X_i)/h)`.
fn local_sums(x_data: &[f64], v: impl Iterator<Item = f64>, x: f64, config: &KernelConfig) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, vi) in x_data.iter().zip(v) {
        let k = config.weight(x, xi);
        num += k * vi;
        den += k;
    }
    (num, den)
}

/// The weights `W_i(x) = K_i / (Δ Σ K_j)`.
pub fn nw_weights(sample: &RegressionSample, x: f64, config: &KernelConfig) -> Result<Vec<f64>> {
    let k: Vec<f64> = sample.x().iter().map(|&xi| config.weight(x, xi)).collect();
    let den: f64 = k.iter().sum();
    if !(den > 0.0) {
        return Err(Error::NoLocalData { x });
    }
    let scale = 1.0 / (sample.delta() * den);
    Ok(k.into_iter().map(|v| v * scale).collect())
}

/// Nadaraya–Watson drift `m_nh(x) = Σ W_i(x) (X_{i+1} - X_i)` with
/// `W_i(x) = K_i / (Δ Σ K_j)`.
pub fn nw_drift(sample: &RegressionSample, x: f64, config: &KernelConfig) -> Result<f64> {
    let d = sample.delta();
    let (num, den) = local_sums(sample.x(), sample.increments(), x, config);
    if !(den > 0.0) {
        return Err(Error::NoLocalData { x });
    }
    Ok(num / (d * den))
}

/// Nadaraya–Watson diffusion `σ²_nh(x) = Σ W_i(x) (X_{i+1} - X_i)²`.
pub fn nw_diffusion(sample: &RegressionSample, x: f64, config: &KernelConfig) -> Result<f64> {
    let d = sample.delta();
    let (num, den) = local_sums(sample.x(), sample.increments().map(|v| v * v), x, config);
    if !(den > 0.0) {
        return Err(Error::NoLocalData { x });
    }
    Ok(num / (d * den))
}

/// Rule-of-thumb reference bandwidth `1.06 · sd(X) · n^{-1/5}`.
pub fn reference_bandwidth(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    let sd = crate::numeric::variance(x).sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::degenerate("covariate has zero variance"));
    }
    Ok(1.06 * sd * (n as f64).powf(-0.2))
}

/// The 40 candidate bandwidths, log-spaced over `[0.1, 10] · h_ref`.
pub fn cv_grid(h_ref: f64) -> Vec<f64> {
    (0..40)
        .map(|k| h_ref * 10f64.powf(-1.0 + 2.0 * k as f64 / 39.0))
        .collect()
}

/// Leave-one-out prediction error of the NW regression of `r` on `x`.
pub fn loo_cv_score(x: &[f64], r: &[f64], h: f64) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            if j != i {
                let k = gaussian((x[i] - x[j]) / h);
                num += k * r[j];
                den += k;
            }
        }
        if !(den > 0.0) {
            return f64::INFINITY;
        }
        let e = r[i] - num / den;
        total += e * e;
    }
    total / n as f64
}

/// Leave-one-out cross-validated bandwidth for the regression of squared
/// scaled increments `(ΔX)²/Δ` on `X`.
///
/// Ties resolve to the smaller bandwidth.
pub fn cv_bandwidth(sample: &RegressionSample) -> Result<f64> {
    if sample.len() < 20 {
        return Err(Error::invalid(format!(
            "cross-validation needs at least 20 pairs, got {}",
            sample.len()
        )));
    }
    let h_ref = reference_bandwidth(sample.x())?;
    let r = sample.squared_scaled();
    let mut best = (f64::INFINITY, f64::NAN);
    for h in cv_grid(h_ref) {
        let score = loo_cv_score(sample.x(), &r, h);
        if score < best.0 {
            best = (score, h);
        }
    }
    if best.1.is_nan() {
        return Err(Error::degenerate("no finite cross-validation score"));
    }
    Ok(best.1)
}

/// How the smoothing bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// [`cv_bandwidth`].
    CrossValidation,
    /// A multiple of [`reference_bandwidth`].
    Reference(f64),
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, sample: &RegressionSample) -> Result<KernelConfig> {
        let h = match *self {
            Bandwidth::CrossValidation => cv_bandwidth(sample)?,
            Bandwidth::Reference(c) => c * reference_bandwidth(sample.x())?,
            Bandwidth::Fixed(h) => h,
        };
        KernelConfig::new(h)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "cv" => Ok(Bandwidth::CrossValidation),
            "rot" | "reference" => Ok(Bandwidth::Reference(1.0)),
            _ => {
                if let Some(rest) = s.strip_prefix("rot*") {
                    let c: f64 = rest.parse().map_err(|_| Error::Parse(format!("bad bandwidth rule {s:?}")))?;
                    return Ok(Bandwidth::Reference(c));
                }
                let h: f64 = s.parse().map_err(|_| Error::Parse(format!("bad bandwidth rule {s:?}")))?;
                KernelConfig::new(h)?;
                Ok(Bandwidth::Fixed(h))
            }
        }
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bandwidth::CrossValidation => f.write_str("cv"),
            Bandwidth::Reference(c) if *c == 1.0 => f.write_str("rot"),
            Bandwidth::Reference(c) => write!(f, "rot*{c}"),
            Bandwidth::Fixed(h) => write!(f, "{h}"),
        }
    }
}

/// Kernel weights `K((X_i - X_j)/h)` among the points of a fixed design,
/// for repeated smoothing of different responses.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    h: f64,
    k: Vec<f64>,
    row_sums: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(x: &[f64], config: &KernelConfig) -> Self {
        let n = x.len();
        let h = config.bandwidth;
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = INV_SQRT_2PI;
            for j in 0..i {
                let w = gaussian((x[i] - x[j]) / h);
                k[i * n + j] = w;
                k[j * n + i] = w;
            }
        }
        let row_sums = (0..n).map(|i| k[i * n..(i + 1) * n].iter().sum()).collect();
        Self { n, h, k, row_sums }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// NW regression of `v` evaluated at every design point.
    pub fn smooth(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.k[i * n..(i + 1) * n];
                row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / self.row_sums[i]
            })
            .collect()
    }

    /// `(n(n-1))⁻¹ Σ_{i≠j} h⁻¹ K_ij w_i w_j`.
    pub fn off_diagonal_form(&self, w: &[f64]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.k[i * n..i * n + i];
            let s: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            total += 2.0 * w[i] * s;
        }
        total / (self.h * n as f64 * (n as f64 - 1.0))
    }
}

/// Pointwise bands for `σ²(x)` on a grid.
///
/// Values are stored on the variance scale, so `lower ≤ point ≤ upper`;
/// the `sigma_*` accessors give the diffusion-scale band. Grid points
/// where the density estimate falls below `1e-12` are marked undefined and
/// carry NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEstimate {
    pub grid: Vec<f64>,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub defined: Vec<bool>,
    pub alpha: f64,
    pub bandwidth: f64,
}

impl BandEstimate {
    pub fn sigma_lower(&self) -> Vec<f64> {
        self.lower.iter().map(|v| v.sqrt()).collect()
    }

    pub fn sigma_upper(&self) -> Vec<f64> {
        self.upper.iter().map(|v| v.sqrt()).collect()
    }

    pub fn sigma_point(&self) -> Vec<f64> {
        self.point.iter().map(|v| v.sqrt()).collect()
    }

    /// Whether `value` lies in the band at grid index `i`.
    pub fn covers(&self, i: usize, value: f64) -> bool {
        self.defined[i] && self.lower[i] <= value && value <= self.upper[i]
    }

    /// CSV with header `x,sigma2_hat,lower,upper`; undefined cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,sigma2_hat,lower,upper")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_full(self.grid[i]),
                fmt_full(self.point[i]),
                fmt_full(self.lower[i]),
                fmt_full(self.upper[i])
            )?;
        }
        Ok(())
    }
}

/// Linear-interpolation sample quantile.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// 101 equally spaced points between the 5th and 95th sample percentiles.
pub fn band_grid(x: &[f64]) -> Vec<f64> {
    let a = quantile(x, 0.05);
    let b = quantile(x, 0.95);
    (0..101).map(|k| a + (b - a) * k as f64 / 100.0).collect()
}

/// Pointwise `1 - α` confidence band for the diffusion function,
///
/// ```text
/// σ²_nh(x) ± z_{1-α/2} √(V̂_σ²(x) / nh),   V̂_σ² = R(K) V̂(u² | x) / π_nh(x)
/// ```
///
/// with `V̂(u² | x) = Σ W_j(x) Δ⁻¹ (ΔX_j)⁴ - σ⁴_nh(x)`. The lower limit is
/// clipped at zero.
pub fn diffusion_band(sample: &RegressionSample, grid: &[f64], config: &KernelConfig, alpha: f64) -> Result<BandEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let n = sample.len() as f64;
    let h = config.bandwidth;
    let d = sample.delta();
    let mut band = BandEstimate {
        grid: grid.to_vec(),
        point: Vec::with_capacity(grid.len()),
        lower: Vec::with_capacity(grid.len()),
        upper: Vec::with_capacity(grid.len()),
        defined: Vec::with_capacity(grid.len()),
        alpha,
        bandwidth: h,
    };
    for &x in grid {
        let density = kde(sample.x(), x, config);
        let (mut s2, mut s4, mut den) = (0.0, 0.0, 0.0);
        for (&xi, dx) in sample.x().iter().zip(sample.increments()) {
            let k = config.weight(x, xi);
            let q = dx * dx;
            s2 += k * q;
            s4 += k * q * q;
            den += k;
        }
        if !(density >= 1e-12 && den > 0.0) {
            band.point.push(f64::NAN);
            band.lower.push(f64::NAN);
            band.upper.push(f64::NAN);
            band.defined.push(false);
            continue;
        }
        let sigma2 = s2 / (d * den);
        let v = s4 / (d * d * den) - sigma2 * sigma2;
        let v_sigma2 = GAUSSIAN_ROUGHNESS * v.max(0.0) / density;
        let half = z * (v_sigma2 / (n * h)).sqrt();
        band.point.push(sigma2);
        band.lower.push((sigma2 - half).max(0.0));
        band.upper.push(sigma2 + half);
        band.defined.push(true);
    }
    Ok(band)
}
