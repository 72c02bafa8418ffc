use std::time::Instant;

use rayon::prelude::*;

use super::config::{HarnessConfig, Scenario};
use super::report::{McCell, McReport};
use crate::estimate::{ArDesign, ArFit};
use crate::gof::{
    calibrate, marked_process_stats, permutation_draws, standardize, BootstrapConfig, Calibration, Covariates,
    DcovDesign, DiffusionSuite, Method, NullFamily,
};
use crate::rng::{normals, SeedStream};
use crate::sde::{
    simulate, simulate_ctar1, simulate_ou_exact, to_regression, Ctar1Spec, ModelSpec, Path,
    Scheme, SimOptions, ScenarioDiffusion, ScenarioDrift, BURN_IN,
};
use crate::{Error, Result};

/// Starting value of the diffusion scenarios.
pub const SCENARIO_X0: f64 = 1.0;
/// States closer to zero than this are reflected away from it.
pub const REFLECT_FLOOR: f64 = 1e-6;
/// A scenario is abandoned when more than this share of replicates fails.
pub const MAX_FAILED_SHARE: f64 = 0.02;

/// The power generator of the dimensionality study.
pub const CTAR_POWER: Ctar1Spec = Ctar1Spec {
    mu1: 4.0,
    alpha1: 0.5,
    mu2: -1.25,
    alpha2: -0.4,
    r: 1.0,
};
/// `(μ, κ, σ)` of the OU size generator of the dimensionality study.
pub const OU_SIZE: (f64, f64, f64) = (0.08, 0.5, 0.5);

fn diffusion_model(scenario: Scenario) -> ModelSpec {
    match scenario {
        Scenario::Size(drift) => ModelSpec::scenario(drift, ScenarioDiffusion::Square),
        Scenario::Power(diffusion) => ModelSpec::scenario(ScenarioDrift::TwoMinusX, diffusion),
        _ => unreachable!("CAR scenarios have their own generators"),
    }
}

/// Simulates one observed path of a scenario on `[0, 1]` with `Δ = 1/n`.
///
/// Diffusion scenarios use the Milstein scheme from `x₀ = 1` with reflection
/// at `|x| < 10⁻⁶`; the clock starts at `-1000Δ` so the recorded sample
/// covers `t ∈ [0, 1]` after burn-in.
pub fn simulate_scenario(scenario: Scenario, n: usize, stream: SeedStream) -> Result<Path> {
    let delta = 1.0 / n as f64;
    let mut rng = stream.rng();
    match scenario {
        Scenario::CarSize => {
            let (mu, kappa, sigma) = OU_SIZE;
            let sd = sigma / (2.0 * kappa).sqrt();
            let x0 = mu + sd * crate::rng::std_normal(&mut rng);
            simulate_ou_exact(mu, kappa, sigma, x0, BURN_IN + n, delta, &mut rng)?.discard(BURN_IN)
        }
        Scenario::CarPower => simulate_ctar1(&CTAR_POWER, n, delta, &mut rng),
        _ => {
            let model = diffusion_model(scenario);
            let opts = SimOptions {
                time_origin: -(BURN_IN as f64) * delta,
                floor: Some(REFLECT_FLOOR),
            };
            simulate(&model, Scheme::Milstein, SCENARIO_X0, BURN_IN + n, delta, &mut rng, opts)?.discard(BURN_IN)
        }
    }
}

/// Outcome of one Monte Carlo replicate: p-values per method (and order).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    /// `(order, method, p_value)`; order is 0 for the diffusion scenarios.
    pub p_values: Vec<(usize, Method, f64)>,
    pub bandwidth: f64,
}

/// One replicate of a diffusion scenario: simulate, fit the `σ²x²` null,
/// compute all requested statistics and calibrate them on shared bootstrap
/// draws.
pub fn diffusion_replicate(cfg: &HarnessConfig, scenario: Scenario, n: usize, stream: SeedStream) -> Result<ReplicateOutcome> {
    let path = simulate_scenario(scenario, n, stream.labelled("simulate"))?;
    let sample = to_regression(&path)?;
    let kernel = cfg.bandwidth.resolve(&sample)?;
    let suite = DiffusionSuite::new(sample.x(), &cfg.methods, &kernel)?;
    let config = BootstrapConfig::new(cfg.b, cfg.alpha)?;
    let results = suite.run(&sample, &NullFamily::ScaleDiffusion, config, cfg.calibration, stream)?;
    Ok(ReplicateOutcome {
        p_values: results.iter().map(|r| (0, r.method, r.p_value)).collect(),
        bandwidth: kernel.bandwidth(),
    })
}

/// AR(p) residual tests with lag-vector covariates.
struct ArTests<'a> {
    methods: &'a [Method],
    covariates: Covariates,
    dcov: Option<DcovDesign>,
}

impl ArTests<'_> {
    fn evaluate(&self, fit: &ArFit) -> Result<Vec<f64>> {
        let marks = standardize(&fit.residuals)?;
        let er = if self.methods.iter().any(|m| matches!(m, Method::ErKs | Method::ErCvm)) {
            Some(marked_process_stats(&self.covariates, &marks)?)
        } else {
            None
        };
        self.methods
            .iter()
            .map(|m| match m {
                Method::ErKs => Ok(er.expect("computed above").0),
                Method::ErCvm => Ok(er.expect("computed above").1),
                Method::Dcov => self.dcov.as_ref().expect("built when DCOV is requested").statistic(&marks),
                other => Err(Error::invalid(format!("{other} is not available for CAR(p) tests"))),
            })
            .collect()
    }
}

/// One replicate of a CAR(p) scenario for every configured order.
///
/// Residuals come from the discrete AR(p) least-squares fit (with the
/// unit-root guard); the bootstrap redraws Gaussian innovations around the
/// fitted values on the fixed lag design.
pub fn car_replicate(cfg: &HarnessConfig, scenario: Scenario, n: usize, stream: SeedStream) -> Result<ReplicateOutcome> {
    let path = simulate_scenario(scenario, n, stream.labelled("simulate"))?;
    let methods: Vec<Method> = cfg
        .methods
        .iter()
        .copied()
        .filter(|m| matches!(m, Method::ErKs | Method::ErCvm | Method::Dcov))
        .collect();
    let mut p_values = Vec::new();
    for &p in &cfg.orders {
        let design = ArDesign::new(path.values(), p)?;
        let covariates = Covariates::from_rows(design.lags())?;
        let tests = ArTests {
            methods: &methods,
            dcov: if methods.contains(&Method::Dcov) {
                Some(DcovDesign::new(&covariates)?)
            } else {
                None
            },
            covariates,
        };
        let fit = design.fit_guarded();
        let observed = tests.evaluate(&fit)?;
        let s = fit.sigma2.sqrt();
        let boot = stream.labelled("bootstrap").substream(p as u64);
        let outcomes: Vec<Result<Vec<f64>>> = (0..cfg.b)
            .into_par_iter()
            .map(|j| {
                let eps = normals(&mut boot.substream(j as u64).rng(), design.len());
                let y: Vec<f64> = fit.fitted.iter().zip(&eps).map(|(m, e)| m + s * e).collect();
                tests.evaluate(&design.fit_guarded_response(&y))
            })
            .collect();
        let mut draws = Vec::with_capacity(cfg.b);
        let mut dropped = 0;
        for o in outcomes {
            match o {
                Ok(t) => draws.push(t),
                Err(_) => dropped += 1,
            }
        }
        if dropped as f64 > crate::gof::MAX_DROPPED_SHARE * cfg.b as f64 {
            return Err(Error::CalibrationUnstable {
                dropped,
                requested: cfg.b,
            });
        }
        for (k, &m) in methods.iter().enumerate() {
            let pv = if m == Method::Dcov && cfg.calibration == Calibration::Permutation {
                let marks = standardize(&fit.residuals)?;
                let reps = permutation_draws(
                    tests.dcov.as_ref().expect("built"),
                    &marks,
                    cfg.b,
                    stream.labelled("permutation").substream(p as u64),
                )?;
                calibrate(observed[k], &reps, cfg.alpha).0
            } else {
                let col: Vec<f64> = draws.iter().map(|r| r[k]).collect();
                calibrate(observed[k], &col, cfg.alpha).0
            };
            p_values.push((p, m, pv));
        }
    }
    Ok(ReplicateOutcome {
        p_values,
        bandwidth: f64::NAN,
    })
}

/// Seed stream of replicate `rep` of `(scenario, n)`.
pub fn replicate_stream(seed: u64, scenario: Scenario, n: usize, rep: usize) -> SeedStream {
    SeedStream::new(seed)
        .labelled(scenario.id())
        .substream(n as u64)
        .substream(rep as u64)
}

/// Runs all replicates of one `(scenario, n)` pair and aggregates rejection
/// rates per method (and CAR order).
pub fn run_scenario(cfg: &HarnessConfig, scenario: Scenario, n: usize) -> Result<Vec<McCell>> {
    let start = Instant::now();
    if cfg.reps == 0 {
        return Ok(Vec::new());
    }
    let outcomes: Vec<Result<ReplicateOutcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let stream = replicate_stream(cfg.seed, scenario, n, rep);
            if scenario.is_car() {
                car_replicate(cfg, scenario, n, stream)
            } else {
                diffusion_replicate(cfg, scenario, n, stream)
            }
        })
        .collect();
    let mut ok = Vec::with_capacity(cfg.reps);
    let mut failed = 0;
    let mut last = String::new();
    for o in outcomes {
        match o {
            Ok(r) => ok.push(r),
            Err(e) => {
                failed += 1;
                last = e.to_string();
            }
        }
    }
    if failed as f64 > MAX_FAILED_SHARE * cfg.reps as f64 {
        return Err(Error::ScenarioAborted {
            failed,
            reps: cfg.reps,
            last,
        });
    }
    let elapsed = start.elapsed().as_secs_f64();
    let Some(first) = ok.first() else {
        return Ok(Vec::new());
    };
    let keys: Vec<(usize, Method)> = first.p_values.iter().map(|&(p, m, _)| (p, m)).collect();
    let cells = keys
        .into_iter()
        .enumerate()
        .map(|(k, (order, method))| {
            let p_values: Vec<f64> = ok.iter().map(|r| r.p_values[k].2).collect();
            let rejections = p_values.iter().filter(|&&p| p <= cfg.alpha).count();
            McCell::new(
                scenario.id(),
                n,
                order,
                method,
                rejections,
                ok.len(),
                failed,
                cfg,
                elapsed,
                p_values,
            )
        })
        .collect();
    Ok(cells)
}

/// Runs every configured scenario at every sample size.
pub fn run_config(cfg: &HarnessConfig) -> Result<McReport> {
    cfg.validate()?;
    let mut report = McReport::default();
    for &scenario in &cfg.scenarios {
        for &n in &cfg.n {
            report.cells.extend(run_scenario(cfg, scenario, n)?);
        }
    }
    Ok(report)
}

/// The five drift scenarios under the `σ²x²` null.
pub fn size_table(cfg: &HarnessConfig) -> Result<McReport> {
    run_config(&HarnessConfig {
        scenarios: Scenario::SIZE.to_vec(),
        ..cfg.clone()
    })
}

/// The five alternative diffusions with drift `2 - x`.
pub fn power_table(cfg: &HarnessConfig) -> Result<McReport> {
    run_config(&HarnessConfig {
        scenarios: Scenario::POWER.to_vec(),
        ..cfg.clone()
    })
}

/// CAR(p) tests on OU (size) and CTAR(1) (power) data.
pub fn dimension_table(cfg: &HarnessConfig) -> Result<McReport> {
    run_config(&HarnessConfig {
        scenarios: vec![Scenario::CarSize, Scenario::CarPower],
        ..cfg.clone()
    })
}
