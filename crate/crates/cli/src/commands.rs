use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path as FsPath;

use anyhow::{bail, Context, Result};
use diffusion_gof::estimate::{fit_car, fit_ckls, fit_ou, fit_scale_diffusion, ParamEstimate};
use diffusion_gof::gof::{BootstrapConfig, DiffusionSuite, NullFamily, NullModel, TestResult};
use diffusion_gof::harness::{run_config, simulate_scenario, HarnessConfig, Scenario, CTAR_POWER};
use diffusion_gof::rng::{std_normal, SeedStream};
use diffusion_gof::sde::{
    simulate_car, simulate_ctar1, simulate_milstein, simulate_ou_exact, to_regression, CarSpec, ModelSpec, Path,
    EXPLOSION_BOUND,
};
use diffusion_gof::smooth::{band_grid, diffusion_band, BandEstimate};
use rand::Rng;

use crate::data::{load_csv, Index, RateSeries, DAILY_DELTA};
use crate::{BandsArgs, Cli, Command, FitArgs, FitModel, InputArgs, McArgs, SimModel, SimulateArgs, TestArgs};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Test(a) => cmd_test(&a),
        Command::Bands(a) => cmd_bands(&a),
        Command::Mc(a) => cmd_mc(&a),
    }
}

/// Writes to `out` (through a temporary file that is renamed once complete)
/// or to stdout.
fn write_artifact(out: Option<&FsPath>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = std::path::PathBuf::from(tmp);
            let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?);
            let written = body(&mut w).and_then(|()| w.flush());
            drop(w);
            if let Err(e) = written {
                let _ = fs::remove_file(&tmp);
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            fs::rename(&tmp, path).with_context(|| format!("cannot move output to {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn load(input: &InputArgs) -> Result<RateSeries> {
    let series = load_csv(&input.input, &input.spec())?;
    eprintln!(
        "{}: {} observations, {} rows with missing values dropped, step {}",
        series.label,
        series.len(),
        series.dropped,
        series.delta
    );
    if matches!(series.index, Index::Dates(_)) {
        eprintln!("note: consecutive dated rows are treated as one step, whatever the calendar gap");
    }
    Ok(series)
}

fn sigma_of(args: &SimulateArgs) -> f64 {
    args.sigma.or(args.sigma2.map(f64::sqrt)).unwrap_or(1.0)
}

/// CKLS by the Milstein scheme with multiplicative compound-Poisson jumps:
/// after each step the level is multiplied by `exp(J)`, `J ~ N(0, sd²)`,
/// with probability `1 - e^{-λΔ}`.
fn simulate_ckls_jumps(
    model: &ModelSpec,
    x0: f64,
    n: usize,
    delta: f64,
    rate: f64,
    sd: f64,
    stream: SeedStream,
) -> Result<Path> {
    let mut rng = stream.rng();
    let p_jump = -(-rate * delta).exp_m1();
    let sq = delta.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = x0;
    values.push(x);
    for i in 0..n {
        let dw = sq * std_normal(&mut rng);
        x += model.drift(x, i as f64 * delta) * delta
            + model.diffusion(x) * dw
            + 0.5 * model.sigma_sigma_prime(x) * (dw * dw - delta);
        if rng.random::<f64>() < p_jump {
            x *= (sd * std_normal(&mut rng)).exp();
        }
        if !x.is_finite() || x.abs() > EXPLOSION_BOUND {
            bail!("simulation diverged at step {}", i + 1);
        }
        values.push(x);
    }
    Ok(Path::new(delta, values)?)
}

/// The path described by `args`, `n + 1` observations.
pub fn simulate_path(args: &SimulateArgs) -> Result<Path> {
    let delta = args.delta.unwrap_or(DAILY_DELTA);
    let stream = SeedStream::new(args.seed);
    let sigma = sigma_of(args);
    if args.jump_rate > 0.0 && args.model != SimModel::Ckls {
        bail!("jumps are only available for the CKLS model");
    }
    let path = match args.model {
        SimModel::Ou => {
            let x0 = args.x0.unwrap_or(args.mu);
            simulate_ou_exact(args.mu, args.kappa, sigma, x0, args.n, delta, &mut stream.rng())?
        }
        SimModel::Ckls => {
            let m = ModelSpec::ckls(args.kappa, args.mu, sigma, args.gamma)?;
            let x0 = args.x0.unwrap_or(args.mu);
            if args.jump_rate > 0.0 {
                simulate_ckls_jumps(&m, x0, args.n, delta, args.jump_rate, args.jump_sd, stream)?
            } else {
                simulate_milstein(&m, x0, args.n, delta, &mut stream.rng())?
            }
        }
        SimModel::Scale => {
            let m = ModelSpec::scale_diffusion(sigma)?;
            simulate_milstein(&m, args.x0.unwrap_or(1.0), args.n, delta, &mut stream.rng())?
        }
        SimModel::Car => {
            if args.alpha.is_empty() {
                bail!("--alpha is required for the CAR model");
            }
            let spec = CarSpec::new(args.alpha.clone(), sigma)?.with_mean(args.mu);
            simulate_car(&spec, args.n, delta, &mut stream.rng())?
        }
        SimModel::Ctar => simulate_ctar1(&CTAR_POWER, args.n, delta, &mut stream.rng())?,
        SimModel::Scenario => {
            let Some(id) = &args.scenario else {
                bail!("--scenario is required (m1..m5, s1..s5, ou or ctar)");
            };
            let scenario: Scenario = id.parse()?;
            simulate_scenario(scenario, args.n, stream)?
        }
    };
    Ok(path)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let path = simulate_path(args)?;
    write_artifact(args.out.as_deref(), |w| path.write_csv(w))
}

/// A fitted model with its parameter names.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub model: &'static str,
    pub names: Vec<String>,
    pub estimate: ParamEstimate,
}

pub fn fit_series(series: &RateSeries, model: FitModel, order: usize) -> Result<Fitted> {
    let path = series.to_path()?;
    let named = |model, est: ParamEstimate| Fitted {
        model,
        names: est.names().iter().map(|s| s.to_string()).collect(),
        estimate: est,
    };
    Ok(match model {
        FitModel::Ou => named("ou", fit_ou(&path)?),
        FitModel::Ckls => named("ckls", fit_ckls(&to_regression(&path)?)?),
        FitModel::Scale => named("scale", fit_scale_diffusion(&to_regression(&path)?)?),
        FitModel::Car => {
            let fit = fit_car(&path, order)?;
            let mut names: Vec<String> = (1..=order).map(|k| format!("alpha{k}")).collect();
            names.push("sigma".into());
            Fitted {
                model: "car",
                names,
                estimate: fit.estimate,
            }
        }
    })
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let series = load(&args.input)?;
    let fitted = fit_series(&series, args.model, args.order)?;
    let est = &fitted.estimate;
    let mut out = io::stdout().lock();
    if args.json {
        let theta: serde_json::Map<String, serde_json::Value> = fitted
            .names
            .iter()
            .zip(&est.theta_hat)
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        let record = serde_json::json!({
            "model": fitted.model,
            "series": series.label,
            "n": series.len(),
            "theta": theta,
            "loglik": est.loglik,
            "converged": est.converged,
            "iterations": est.iterations,
        });
        writeln!(out, "{record}")?;
    } else {
        writeln!(out, "parameter,value")?;
        for (k, v) in fitted.names.iter().zip(&est.theta_hat) {
            writeln!(out, "{k},{v}")?;
        }
        writeln!(out, "loglik,{}", est.loglik)?;
        writeln!(out, "converged,{}", est.converged)?;
    }
    Ok(())
}

/// Tests `H₀: σ(x) = σx^γ` (CKLS) on one series with every requested
/// method, calibrated on shared bootstrap draws.
pub fn run_test(series: &RateSeries, args: &TestArgs) -> Result<Vec<TestResult>> {
    let path = series.to_path()?;
    let sample = to_regression(&path)?;
    let kernel = args.bandwidth.resolve(&sample)?;
    let suite = DiffusionSuite::new(sample.x(), &args.method, &kernel)?;
    let config = BootstrapConfig::new(args.b, args.alpha)?;
    let mut results = suite.run(&sample, &NullFamily::Ckls, config, args.calibration, SeedStream::new(args.seed))?;
    for r in &mut results {
        r.seed = Some(args.seed);
    }
    Ok(results)
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let series = load(&args.input)?;
    let results = run_test(&series, args)?;
    if let Ok(m) = NullFamily::Ckls.fit(&to_regression(&series.to_path()?)?) {
        let t = m.theta();
        eprintln!("CKLS fit: kappa {} mu {} sigma {} gamma {}", t[0], t[1], t[2], t[3]);
    }
    write_artifact(args.out.as_deref(), |w| {
        if args.json {
            for r in &results {
                writeln!(w, "{}", serde_json::to_string(r).map_err(io::Error::other)?)?;
            }
        } else {
            writeln!(w, "{}", TestResult::CSV_HEADER)?;
            for r in &results {
                writeln!(w, "{}", r.csv_row())?;
            }
        }
        Ok(())
    })
}

pub fn band_estimate(series: &RateSeries, args: &BandsArgs) -> Result<BandEstimate> {
    let sample = to_regression(&series.to_path()?)?;
    let kernel = args.bandwidth.resolve(&sample)?;
    Ok(diffusion_band(&sample, &band_grid(sample.x()), &kernel, args.alpha)?)
}

fn cmd_bands(args: &BandsArgs) -> Result<()> {
    let series = load(&args.input)?;
    let band = band_estimate(&series, args)?;
    eprintln!("bandwidth {}", band.bandwidth);
    write_artifact(args.out.as_deref(), |w| band.write_csv(w))
}

fn cmd_mc(args: &McArgs) -> Result<()> {
    let mut text =
        fs::read_to_string(&args.config).with_context(|| format!("cannot read {}", args.config.display()))?;
    // a later assignment wins, so the flag overrides the file
    text.push_str(&format!("\nseed = {}\n", args.seed));
    let cfg = HarnessConfig::parse(&text)?;
    let report = run_config(&cfg)?;
    write_artifact(args.out.as_deref(), |w| report.write_csv(w))
}
