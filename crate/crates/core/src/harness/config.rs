use std::fmt;
use std::str::FromStr;

use crate::gof::{Calibration, Method};
use crate::sde::{ScenarioDiffusion, ScenarioDrift};
use crate::smooth::Bandwidth;
use crate::{Error, Result};

/// Data-generating design of one experiment row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// `σ²(x) = x²` with one of the five drifts; the null holds.
    Size(ScenarioDrift),
    /// Drift `2 - x` with one of the five alternative diffusions.
    Power(ScenarioDiffusion),
    /// OU(0.08, 0.5, σ² = 0.25) tested against CAR(p); the null holds.
    CarSize,
    /// CTAR(1)(4, 0.5, -1.25, -0.4; r = 1) tested against CAR(p).
    CarPower,
}

impl Scenario {
    pub const SIZE: [Scenario; 5] = [
        Scenario::Size(ScenarioDrift::Zero),
        Scenario::Size(ScenarioDrift::Two),
        Scenario::Size(ScenarioDrift::Identity),
        Scenario::Size(ScenarioDrift::TwoMinusX),
        Scenario::Size(ScenarioDrift::TimeTimesX),
    ];

    pub const POWER: [Scenario; 5] = [
        Scenario::Power(ScenarioDiffusion::OnePlusSquare),
        Scenario::Power(ScenarioDiffusion::Unit),
        Scenario::Power(ScenarioDiffusion::FivePow15),
        Scenario::Power(ScenarioDiffusion::FiveAbs),
        Scenario::Power(ScenarioDiffusion::ShiftedSquare),
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Scenario::Size(d) => match d {
                ScenarioDrift::Zero => "m1",
                ScenarioDrift::Two => "m2",
                ScenarioDrift::Identity => "m3",
                ScenarioDrift::TwoMinusX => "m4",
                ScenarioDrift::TimeTimesX => "m5",
            },
            Scenario::Power(s) => match s {
                ScenarioDiffusion::OnePlusSquare => "s1",
                ScenarioDiffusion::Unit => "s2",
                ScenarioDiffusion::FivePow15 => "s3",
                ScenarioDiffusion::FiveAbs => "s4",
                ScenarioDiffusion::ShiftedSquare => "s5",
                // Drift 2 - x with the null diffusion is the m4 size design.
                ScenarioDiffusion::Square => "m4",
            },
            Scenario::CarSize => "ou",
            Scenario::CarPower => "ctar",
        }
    }

    pub fn is_car(&self) -> bool {
        matches!(self, Scenario::CarSize | Scenario::CarPower)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let all = Self::SIZE
            .iter()
            .chain(&Self::POWER)
            .chain(&[Scenario::CarSize, Scenario::CarPower]);
        for sc in all {
            if sc.id() == s {
                return Ok(*sc);
            }
        }
        Err(Error::Parse(format!(
            "unknown scenario {s:?} (expected m1..m5, s1..s5, ou or ctar)"
        )))
    }
}

/// Experiment settings, read from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub scenarios: Vec<Scenario>,
    pub n: Vec<usize>,
    pub reps: usize,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub bandwidth: Bandwidth,
    /// CAR orders for the `ou` and `ctar` scenarios.
    pub orders: Vec<usize>,
    /// Calibration of the distance-covariance test; the others always use
    /// the bootstrap.
    pub calibration: Calibration,
}

impl HarnessConfig {
    /// Defaults: all size scenarios, n ∈ {100, 250, 500, 1000}, 1000
    /// replicates, B = 1000, α = 0.05, every applicable method, CV bandwidth.
    pub fn new(seed: u64) -> Self {
        Self {
            scenarios: Scenario::SIZE.to_vec(),
            n: vec![100, 250, 500, 1000],
            reps: 1000,
            b: 1000,
            alpha: 0.05,
            seed,
            methods: vec![Method::ErKs, Method::ErCvm, Method::Np, Method::Dcov],
            bandwidth: Bandwidth::CrossValidation,
            orders: vec![1, 2, 3, 4, 5],
            calibration: Calibration::Bootstrap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.b < 100 {
            return Err(Error::invalid(format!("B must be at least 100, got {}", self.b)));
        }
        if self.n.iter().any(|&n| n < 20) {
            return Err(Error::invalid("sample sizes must be at least 20"));
        }
        if self.orders.contains(&0) {
            return Err(Error::invalid("CAR orders must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment and lists are
    /// comma-separated. `seed` is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new(0);
        let mut seed = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            match key {
                "scenarios" => cfg.scenarios = list(value).map_err(at)?,
                "n" => cfg.n = list(value).map_err(at)?,
                "reps" => cfg.reps = scalar(value).map_err(at)?,
                "B" | "b" => cfg.b = scalar(value).map_err(at)?,
                "alpha" => cfg.alpha = scalar(value).map_err(at)?,
                "seed" => seed = Some(scalar(value).map_err(at)?),
                "methods" => cfg.methods = list(value).map_err(at)?,
                "bandwidth" => cfg.bandwidth = Bandwidth::parse(value).map_err(at)?,
                "orders" => cfg.orders = list(value).map_err(at)?,
                "calibration" => cfg.calibration = value.parse().map_err(at)?,
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        cfg.seed = seed.ok_or_else(|| Error::Parse("missing required key `seed`".into()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn scalar<T: FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("cannot parse {v:?}")))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| Error::Parse(format!("cannot parse {s:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full() {
        let cfg = HarnessConfig::parse(
            "# size study\nscenarios = m1, m4\nn = 100,250\nreps = 500\nB = 300\nalpha = 0.05\nseed = 7\n\
             methods = er-ks, er-cvm, np, dcov\nbandwidth = cv # default\norders = 1,5\ncalibration = permutation\n",
        )
        .unwrap();
        assert_eq!(cfg.scenarios, vec![Scenario::Size(ScenarioDrift::Zero), Scenario::Size(ScenarioDrift::TwoMinusX)]);
        assert_eq!(cfg.n, vec![100, 250]);
        assert_eq!((cfg.reps, cfg.b, cfg.seed), (500, 300, 7));
        assert_eq!(cfg.methods.len(), 4);
        assert_eq!(cfg.orders, vec![1, 5]);
        assert_eq!(cfg.calibration, Calibration::Permutation);
    }

    #[test]
    fn seed_required() {
        assert!(HarnessConfig::parse("reps = 10\n").is_err());
    }

    #[test]
    fn unknown_key_names_line() {
        let e = HarnessConfig::parse("seed = 1\nfoo = 2\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
    }

    #[test]
    fn scenario_ids_round_trip() {
        for s in Scenario::SIZE.iter().chain(&Scenario::POWER) {
            assert_eq!(s.id().parse::<Scenario>().unwrap(), *s);
        }
    }
}
