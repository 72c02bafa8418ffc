use rand::Rng;

use super::{ModelSpec, Path};
use crate::rng::std_normal;
use crate::{Error, Result};

/// Paths are aborted once `|X|` exceeds this bound.
pub const EXPLOSION_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Milstein,
}

/// Extra knobs for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Time of the first observation; the drift sees `t_i = origin + iΔ`.
    pub time_origin: f64,
    /// When set, states with `|x| < floor` are pushed back to `±floor`.
    pub floor: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            time_origin: 0.0,
            floor: None,
        }
    }
}

fn check_grid(x0: f64, n: usize, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if !x0.is_finite() {
        return Err(Error::invalid(format!("x0 must be finite, got {x0}")));
    }
    Ok(())
}

#[inline]
fn step(model: &ModelSpec, scheme: Scheme, x: f64, t: f64, dt: f64, dw: f64, i: usize) -> Result<f64> {
    let s = model.diffusion(x);
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("diffusion {s} at x = {x} (step {i})")));
    }
    let mut next = x + model.drift(x, t) * dt + s * dw;
    if scheme == Scheme::Milstein {
        next += 0.5 * model.sigma_sigma_prime(x) * (dw * dw - dt);
    }
    Ok(next)
}

/// Drives the scheme with given Brownian increments `dw[i] = W_{t_{i+1}} - W_{t_i}`.
///
/// Coupled simulations on nested grids feed sums of fine increments to the
/// coarse path.
pub fn simulate_with_increments(
    model: &ModelSpec,
    scheme: Scheme,
    x0: f64,
    delta: f64,
    dw: &[f64],
    opts: SimOptions,
) -> Result<Path> {
    check_grid(x0, dw.len(), delta)?;
    let mut values = Vec::with_capacity(dw.len() + 1);
    values.push(x0);
    let mut x = x0;
    for (i, &w) in dw.iter().enumerate() {
        let t = opts.time_origin + i as f64 * delta;
        x = step(model, scheme, x, t, delta, w, i)?;
        if let Some(floor) = opts.floor {
            if x.abs() < floor {
                x = if x < 0.0 { -floor } else { floor };
            }
        }
        if !x.is_finite() || x.abs() > EXPLOSION_BOUND {
            return Err(Error::SimulationDiverged { step: i + 1, value: x });
        }
        values.push(x);
    }
    Path::new(delta, values)
}

/// General entry point: `n` steps of size `delta` from `x0`.
pub fn simulate<R: Rng + ?Sized>(
    model: &ModelSpec,
    scheme: Scheme,
    x0: f64,
    n: usize,
    delta: f64,
    rng: &mut R,
    opts: SimOptions,
) -> Result<Path> {
    check_grid(x0, n, delta)?;
    let sq = delta.sqrt();
    let dw: Vec<f64> = (0..n).map(|_| sq * std_normal(rng)).collect();
    simulate_with_increments(model, scheme, x0, delta, &dw, opts)
}

/// Euler–Maruyama: `X_{i+1} = X_i + m(X_i)Δ + σ(X_i)√Δ ε_i`.
pub fn simulate_euler<R: Rng + ?Sized>(model: &ModelSpec, x0: f64, n: usize, delta: f64, rng: &mut R) -> Result<Path> {
    simulate(model, Scheme::Euler, x0, n, delta, rng, SimOptions::default())
}

/// Milstein: Euler plus `½ σσ'(Δε² - Δ)`.
pub fn simulate_milstein<R: Rng + ?Sized>(
    model: &ModelSpec,
    x0: f64,
    n: usize,
    delta: f64,
    rng: &mut R,
) -> Result<Path> {
    simulate(model, Scheme::Milstein, x0, n, delta, rng, SimOptions::default())
}

/// Exact Gaussian transitions of `dX = κ(μ - X)dt + σ dW`.
pub fn simulate_ou_exact<R: Rng + ?Sized>(
    mu: f64,
    kappa: f64,
    sigma: f64,
    x0: f64,
    n: usize,
    delta: f64,
    rng: &mut R,
) -> Result<Path> {
    check_grid(x0, n, delta)?;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let phi = (-kappa * delta).exp();
    let sd = sigma * (-(-2.0 * kappa * delta).exp_m1() / (2.0 * kappa)).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = x0;
    values.push(x);
    for _ in 0..n {
        x = mu + (x - mu) * phi + sd * std_normal(rng);
        values.push(x);
    }
    Path::new(delta, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn zero_noise_euler_is_ode_recursion() {
        let m = ModelSpec::custom(|_, _| 2.0, |_| 0.0);
        let p = simulate_euler(&m, 0.0, 3, 0.1, &mut SeedStream::new(1).rng()).unwrap();
        let want = [0.0, 0.2, 0.4, 0.6];
        for (a, b) in p.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn brownian_path_is_cumulative_sum() {
        let m = ModelSpec::custom(|_, _| 0.0, |_| 1.0);
        let delta = 0.01;
        let p = simulate_euler(&m, 0.0, 50, delta, &mut SeedStream::new(9).rng()).unwrap();
        let mut rng = SeedStream::new(9).rng();
        let mut acc = 0.0;
        for (i, x) in p.values().iter().enumerate().skip(1) {
            acc += delta.sqrt() * std_normal(&mut rng);
            assert_eq!(*x, acc, "step {i}");
        }
    }

    #[test]
    fn unit_interval_grid() {
        let m = ModelSpec::ou(0.0, 1.0, 1.0).unwrap();
        let n = 100;
        let p = simulate_euler(&m, 0.0, n, 1.0 / n as f64, &mut SeedStream::new(3).rng()).unwrap();
        assert_eq!(p.values().len(), 101);
        assert!((p.t_end() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn milstein_equals_euler_for_constant_sigma() {
        let m = ModelSpec::ou(1.0, 0.7, 0.3).unwrap();
        let a = simulate_euler(&m, 0.5, 200, 0.01, &mut SeedStream::new(5).rng()).unwrap();
        let b = simulate_milstein(&m, 0.5, 200, 0.01, &mut SeedStream::new(5).rng()).unwrap();
        assert_eq!(a, b);
        let c = ModelSpec::custom(|x, _| -x, |_| 0.4);
        let a = simulate_euler(&c, 0.5, 200, 0.01, &mut SeedStream::new(5).rng()).unwrap();
        let b = simulate_milstein(&c, 0.5, 200, 0.01, &mut SeedStream::new(5).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn milstein_single_step_substitution() {
        let m = ModelSpec::custom(|_, _| 0.0, |x| x);
        let delta: f64 = 0.04;
        let eps = 0.7;
        let dw = delta.sqrt() * eps;
        let p = simulate_with_increments(&m, Scheme::Milstein, 1.0, delta, &[dw], SimOptions::default()).unwrap();
        let want = 1.0 + delta.sqrt() * eps + 0.5 * (delta * eps * eps - delta);
        assert!((p.values()[1] - want).abs() < 1e-9);
    }

    #[test]
    fn explosion_reports_step() {
        let m = ModelSpec::custom(|x, _| x * x, |_| 0.0);
        let err = simulate_euler(&m, 10.0, 100, 1.0, &mut SeedStream::new(1).rng()).unwrap_err();
        match err {
            Error::SimulationDiverged { step, .. } => assert_eq!(step, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn floor_keeps_path_off_origin() {
        let m = ModelSpec::custom(|x, _| -x / 0.1, |_| 0.0);
        let opts = SimOptions {
            floor: Some(1e-6),
            ..SimOptions::default()
        };
        let p = simulate(&m, Scheme::Euler, 1.0, 5, 0.1, &mut SeedStream::new(1).rng(), opts).unwrap();
        assert_eq!(p.values()[1], 1e-6);
    }

    #[test]
    fn ou_degenerate_noise_stays_at_mean() {
        let p = simulate_ou_exact(0.08, 0.5, 1e-300, 0.08, 100, 0.1, &mut SeedStream::new(2).rng()).unwrap();
        assert!(p.values().iter().all(|&x| x == 0.08));
        assert!(simulate_ou_exact(0.0, 0.0, 1.0, 0.0, 10, 0.1, &mut SeedStream::new(2).rng()).is_err());
    }

    #[test]
    fn seed_determinism() {
        let m = ModelSpec::ckls(0.5, 2.0, 0.3, 0.5).unwrap();
        let a = simulate_milstein(&m, 2.0, 500, 0.01, &mut SeedStream::new(11).rng()).unwrap();
        let b = simulate_milstein(&m, 2.0, 500, 0.01, &mut SeedStream::new(11).rng()).unwrap();
        assert_eq!(a, b);
    }
}
