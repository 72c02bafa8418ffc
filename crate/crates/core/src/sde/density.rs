use super::ModelSpec;
use crate::numeric::integrate;
use crate::{Error, Result};

/// An interval of the real line; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::invalid(format!("empty support ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Normalised stationary density
///
/// ```text
/// π(x) = ξ σ⁻²(x) exp(∫_c^x 2m(u)/σ²(u) du)
/// ```
///
/// with the normalising constant computed once by adaptive quadrature.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    model: ModelSpec,
    support: Support,
    center: f64,
    log_shift: f64,
    log_norm: f64,
}

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-9;

impl StationaryDensity {
    pub fn new(model: &ModelSpec, support: Support) -> Result<Self> {
        if !model.is_time_homogeneous() {
            return Err(Error::invalid("stationary density needs a time-homogeneous drift"));
        }
        let center = pick_center(model, support);
        let mut d = Self {
            model: model.clone(),
            support,
            center,
            log_shift: 0.0,
            log_norm: 0.0,
        };
        d.log_shift = d
            .unnormalised_log(center)
            .ok_or_else(|| Error::NormalizationFailed(format!("density undefined at {center}")))?;
        let mass = d.mass()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::NormalizationFailed(format!("total mass {mass}")));
        }
        d.log_norm = -mass.ln();
        Ok(d)
    }

    fn unnormalised_log(&self, x: f64) -> Option<f64> {
        let s2 = self.model.variance(x);
        if !(s2 > 0.0 && s2.is_finite()) {
            return None;
        }
        let c = self.center;
        let scale = integrate(
            |u| 2.0 * self.model.drift(u, 0.0) / self.model.variance(u),
            c,
            x,
            INNER_TOL,
            INNER_TOL,
        )?;
        Some(scale - s2.ln())
    }

    fn shifted(&self, x: f64) -> f64 {
        match self.unnormalised_log(x) {
            Some(l) => (l - self.log_shift).exp(),
            None => f64::NAN,
        }
    }

    fn mass(&self) -> Result<f64> {
        let Support { lo, hi } = self.support;
        let c = self.center;
        let fail = || Error::NormalizationFailed("quadrature did not converge".into());
        let integrand_ok = |v: f64| if v.is_finite() { v } else { f64::NAN };
        let total = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => integrate(|u| integrand_ok(self.shifted(u)), lo, hi, OUTER_TOL, 0.0),
            (true, false) => integrate(
                |t| {
                    let w = 1.0 - t;
                    integrand_ok(self.shifted(lo + t / w)) / (w * w)
                },
                0.0,
                1.0,
                OUTER_TOL,
                0.0,
            ),
            (false, true) => integrate(
                |t| {
                    let w = 1.0 - t;
                    integrand_ok(self.shifted(hi - t / w)) / (w * w)
                },
                0.0,
                1.0,
                OUTER_TOL,
                0.0,
            ),
            (false, false) => integrate(
                |t| {
                    let w = 1.0 - t * t;
                    integrand_ok(self.shifted(c + t / w)) * (1.0 + t * t) / (w * w)
                },
                -1.0,
                1.0,
                OUTER_TOL,
                0.0,
            ),
        };
        // The tails of the mapped integrand evaluate 0·∞ to NaN near ±1;
        // treat those as genuine failures rather than zero mass.
        total.ok_or_else(fail)
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        match self.unnormalised_log(x) {
            Some(l) => (l - self.log_shift + self.log_norm).exp(),
            None => 0.0,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }
}

/// A reference point near the bulk of the mass: a sign change of the drift
/// if one is found, else a point in the middle of the support.
fn pick_center(model: &ModelSpec, s: Support) -> f64 {
    let base = match (s.lo.is_finite(), s.hi.is_finite()) {
        (true, true) => 0.5 * (s.lo + s.hi),
        (true, false) => s.lo + 1.0,
        (false, true) => s.hi - 1.0,
        (false, false) => 0.0,
    };
    let m = |x: f64| model.drift(x, 0.0);
    if m(base) == 0.0 {
        return base;
    }
    // Walk a geometric ladder outward on each side looking for a bracket.
    for dir in [1.0, -1.0] {
        let mut prev = base;
        for k in 0..60 {
            let cand = base + dir * 1e-3 * 1.5f64.powi(k);
            if !s.contains(cand) {
                break;
            }
            let (mp, mc) = (m(prev), m(cand));
            if mp.is_finite() && mc.is_finite() && mp.signum() != mc.signum() {
                return bisect(m, prev.min(cand), prev.max(cand));
            }
            prev = cand;
        }
    }
    base
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-shot evaluation of the stationary density at `x`.
pub fn stationary_density(model: &ModelSpec, x: f64, support: Support) -> Result<f64> {
    Ok(StationaryDensity::new(model, support)?.pdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ou_is_gaussian() {
        let (mu, kappa, sigma) = (0.08, 0.5, 0.5);
        let m = ModelSpec::ou(mu, kappa, sigma).unwrap();
        let d = StationaryDensity::new(&m, Support::real_line()).unwrap();
        let v = sigma * sigma / (2.0 * kappa);
        for x in [-1.0, -0.3, 0.08, 0.5, 1.2] {
            let want = (-(x - mu) * (x - mu) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
            assert!((d.pdf(x) - want).abs() < 1e-7 * want.max(1e-3), "x {x}");
        }
    }

    #[test]
    fn ou_far_from_origin() {
        let m = ModelSpec::ou(250.0, 2.0, 1.0).unwrap();
        let d = StationaryDensity::new(&m, Support::real_line()).unwrap();
        let want = 1.0 / (2.0 * std::f64::consts::PI * 0.25).sqrt();
        assert!((d.pdf(250.0) - want).abs() < 1e-7);
    }

    #[test]
    fn cir_is_gamma() {
        // CKLS with γ = ½: stationary Gamma(2κμ/σ², rate 2κ/σ²).
        let (kappa, mu, sigma) = (0.5, 2.0, 0.5);
        let m = ModelSpec::ckls(kappa, mu, sigma, 0.5).unwrap();
        let d = StationaryDensity::new(&m, Support::positive()).unwrap();
        let shape = 2.0 * kappa * mu / (sigma * sigma);
        let rate = 2.0 * kappa / (sigma * sigma);
        let g = statrs::distribution::Gamma::new(shape, rate).unwrap();
        use statrs::distribution::Continuous;
        for x in [0.5, 1.0, 2.0, 3.5] {
            assert!((d.pdf(x) - g.pdf(x)).abs() < 1e-6, "x {x}");
        }
    }

    #[test]
    fn integrates_to_one() {
        let m = ModelSpec::ckls(0.3, 1.0, 0.4, 0.8).unwrap();
        let d = StationaryDensity::new(&m, Support::positive()).unwrap();
        let total = integrate(|x| d.pdf(x), 1e-9, 40.0, 1e-10, 0.0).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn explosive_model_fails() {
        let m = ModelSpec::custom(|x, _| x, |_| 1.0);
        assert!(matches!(
            StationaryDensity::new(&m, Support::real_line()),
            Err(Error::NormalizationFailed(_))
        ));
    }
}
