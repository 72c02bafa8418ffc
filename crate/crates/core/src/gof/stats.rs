use super::residuals::{Covariates, Residuals};
use crate::sde::{ModelSpec, RegressionSample};
use crate::smooth::{gaussian, KernelConfig, KernelMatrix};
use crate::{Error, Result};

/// Kolmogorov–Smirnov and Cramér–von Mises functionals of the marked
/// empirical process `R(x) = n^{-1/2} Σ w_i 1{X_i ≤ x}`, evaluated at the
/// sample points. Vector covariates use the componentwise order.
pub fn marked_process_stats(covariates: &Covariates, marks: &[f64]) -> Result<(f64, f64)> {
    let n = marks.len();
    if covariates.len() != n {
        return Err(Error::LengthMismatch(format!("{} covariates, {n} marks", covariates.len())));
    }
    if n < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    let r = match covariates.as_scalar() {
        Some(x) => scalar_process(x, marks),
        None => (0..n)
            .map(|j| (0..n).filter(|&i| covariates.le(i, j)).map(|i| marks[i]).sum::<f64>())
            .collect(),
    };
    let scale = (n as f64).sqrt();
    let ks = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
    let cvm = r.iter().map(|v| v * v).sum::<f64>() / (scale * scale * n as f64);
    Ok((ks, cvm))
}

/// `Σ_i w_i 1{X_i ≤ X_j}` for every `j`, by sorting.
fn scalar_process(x: &[f64], marks: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    let mut k = 0;
    while k < n {
        // Ties share the cumulative sum through the end of their block.
        let mut end = k;
        while end + 1 < n && x[order[end + 1]] == x[order[k]] {
            end += 1;
        }
        for &i in &order[k..=end] {
            acc += marks[i];
        }
        for &i in &order[k..=end] {
            out[i] = acc;
        }
        k = end + 1;
    }
    out
}

/// ER statistics of the diffusion specification: the marked process with
/// standardised variance residuals as marks. Returns `(KS, CvM)`.
pub fn er_test_stats(residuals: &Residuals) -> Result<(f64, f64)> {
    marked_process_stats(residuals.covariates(), &residuals.variance_marks()?)
}

/// `(n(n-1))⁻¹ Σ_{i≠j} h⁻¹ K((X_i - X_j)/h) w_i w_j` for scalar covariates.
pub fn kernel_form(x: &[f64], w: &[f64], config: &KernelConfig) -> Result<f64> {
    let n = x.len();
    if n != w.len() {
        return Err(Error::LengthMismatch(format!("{n} covariates, {} marks", w.len())));
    }
    if n < 3 {
        return Err(Error::invalid("need at least three observations"));
    }
    let h = config.bandwidth();
    let mut total = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..i {
            s += gaussian((x[i] - x[j]) / h) * w[j];
        }
        total += 2.0 * w[i] * s;
    }
    Ok(total / (h * n as f64 * (n as f64 - 1.0)))
}

/// Kernel statistic `T₁ₙ` of the diffusion specification with standardised
/// variance residuals as marks.
pub fn np_stat(residuals: &Residuals, config: &KernelConfig) -> Result<f64> {
    let x = residuals
        .covariates()
        .as_scalar()
        .ok_or_else(|| Error::invalid("the kernel statistic takes scalar covariates"))?;
    kernel_form(x, &residuals.variance_marks()?, config)
}

/// `Λ = (n/2) log(RSS₀ / RSS₁)`.
pub fn glrt_from_rss(n: usize, rss0: f64, rss1: f64) -> Result<f64> {
    if !(rss1 > 0.0) {
        return Err(Error::DegenerateFit(format!("nonparametric RSS is {rss1}")));
    }
    Ok(0.5 * n as f64 * (rss0 / rss1).ln())
}

/// Generalised likelihood ratio statistic for the variance regression of
/// `(ΔX)²/Δ` on `X`: parametric fit `σ²_θ̂(X)` against the NW fit.
pub fn glrt_stat(sample: &RegressionSample, fitted: &ModelSpec, config: &KernelConfig) -> Result<f64> {
    let km = KernelMatrix::new(sample.x(), config);
    glrt_stat_with(sample, fitted, &km)
}

pub(crate) fn glrt_stat_with(sample: &RegressionSample, fitted: &ModelSpec, km: &KernelMatrix) -> Result<f64> {
    let r = sample.squared_scaled();
    let smooth = km.smooth(&r);
    let mut rss0 = 0.0;
    let mut rss1 = 0.0;
    for ((&x, &ri), &si) in sample.x().iter().zip(&r).zip(&smooth) {
        rss0 += (ri - fitted.variance(x)).powi(2);
        rss1 += (ri - si).powi(2);
    }
    glrt_from_rss(r.len(), rss0, rss1)
}

/// Empirical distance covariance `V²ₙ = n⁻² Σ A_kl B_kl` and
/// `S₂ = ā·· b̄··` between a scalar sample and a vector sample.
pub fn dcov(u: &[f64], w: &Covariates) -> Result<(f64, f64)> {
    let design = DcovDesign::new(w)?;
    design.dcov(u)
}

/// Double-centred distances of a fixed covariate sample.
///
/// Since `Σ A_kl B_kl = Σ a_kl B_kl` whenever `B` is double-centred, only the
/// covariate side needs centring; residual distances are used raw.
#[derive(Debug, Clone)]
pub struct DcovDesign {
    n: usize,
    centred: Vec<f64>,
    mean_b: f64,
}

impl DcovDesign {
    pub fn new(w: &Covariates) -> Result<Self> {
        let n = w.len();
        if n < 2 {
            return Err(Error::invalid("distance covariance needs n ≥ 2"));
        }
        let mut b = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..k {
                let d = w.distance(k, l);
                b[k * n + l] = d;
                b[l * n + k] = d;
            }
        }
        let row: Vec<f64> = (0..n).map(|k| b[k * n..(k + 1) * n].iter().sum::<f64>() / n as f64).collect();
        let mean_b = row.iter().sum::<f64>() / n as f64;
        for k in 0..n {
            for l in 0..n {
                b[k * n + l] += mean_b - row[k] - row[l];
            }
        }
        Ok(Self { n, centred: b, mean_b })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `(V²ₙ, S₂)`.
    pub fn dcov(&self, u: &[f64]) -> Result<(f64, f64)> {
        let (v2, mean_a) = self.parts(u)?;
        Ok((v2, mean_a * self.mean_b))
    }

    /// `(V²ₙ, ā··)`.
    fn parts(&self, u: &[f64]) -> Result<(f64, f64)> {
        let n = self.n;
        if u.len() != n {
            return Err(Error::LengthMismatch(format!("{} residuals, {n} covariates", u.len())));
        }
        let mut cross = 0.0;
        let mut sum_a = 0.0;
        for k in 0..n {
            let row = &self.centred[k * n..k * n + k];
            let mut s = 0.0;
            let mut sa = 0.0;
            for (l, b) in row.iter().enumerate() {
                let a = (u[k] - u[l]).abs();
                s += a * b;
                sa += a;
            }
            cross += 2.0 * s;
            sum_a += 2.0 * sa;
        }
        let n2 = (n * n) as f64;
        // The n-weighted sum can round slightly negative.
        let v2 = (cross / n2).max(0.0);
        Ok((v2, sum_a / n2))
    }

    /// `Tₙ = n V²ₙ / S₂`.
    pub fn statistic(&self, u: &[f64]) -> Result<f64> {
        let (v2, mean_a) = self.parts(u)?;
        let s2 = mean_a * self.mean_b;
        if s2 > 0.0 {
            Ok(self.n as f64 * v2 / s2)
        } else if mean_a == 0.0 && self.mean_b == 0.0 {
            Err(Error::degenerate("both distance-covariance samples are constant"))
        } else {
            // One constant sample: V²ₙ is exactly zero.
            Ok(0.0)
        }
    }
}

/// `Tₙ = n V²ₙ(ε̂, X) / S₂`.
pub fn dcov_stat(residuals: &Residuals) -> Result<f64> {
    DcovDesign::new(residuals.covariates())?.statistic(residuals.eps_hat())
}
