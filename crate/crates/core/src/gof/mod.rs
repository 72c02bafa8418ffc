//! Goodness-of-fit statistics for the diffusion specification and their
//! resampling calibration.

mod calibrate;
mod residuals;
mod stats;
mod suite;

pub use calibrate::{
    bootstrap_draws, calibrate, parametric_bootstrap, permutation_pvalue, resample, BootstrapConfig,
    BootstrapDraws, NullFamily, NullModel, Resampler, MAX_DROPPED_SHARE,
};
pub use residuals::{residuals, residuals_kernel, standardize, Covariates, DriftMode, Residuals, SIGMA_FLOOR};
pub use stats::{
    dcov, dcov_stat, er_test_stats, glrt_from_rss, glrt_stat, kernel_form, marked_process_stats, np_stat,
    DcovDesign,
};
pub(crate) use suite::permutation_draws;
pub use suite::DiffusionSuite;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    #[serde(rename = "ER-KS")]
    ErKs,
    #[serde(rename = "ER-CvM")]
    ErCvm,
    #[serde(rename = "NP")]
    Np,
    #[serde(rename = "GLRT")]
    Glrt,
    #[serde(rename = "DCOV")]
    Dcov,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::ErKs, Method::ErCvm, Method::Np, Method::Glrt, Method::Dcov];

    pub fn label(self) -> &'static str {
        match self {
            Method::ErKs => "ER-KS",
            Method::ErCvm => "ER-CvM",
            Method::Np => "NP",
            Method::Glrt => "GLRT",
            Method::Dcov => "DCOV",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "er-ks" => Ok(Method::ErKs),
            "er-cvm" => Ok(Method::ErCvm),
            "np" => Ok(Method::Np),
            "glrt" => Ok(Method::Glrt),
            "dcov" => Ok(Method::Dcov),
            other => Err(Error::Parse(format!(
                "unknown method {other:?} (expected er-ks, er-cvm, np, glrt or dcov)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    Bootstrap,
    Permutation,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Bootstrap => "bootstrap",
            Calibration::Permutation => "permutation",
        })
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bootstrap" => Ok(Calibration::Bootstrap),
            "permutation" => Ok(Calibration::Permutation),
            other => Err(Error::Parse(format!("unknown calibration {other:?}"))),
        }
    }
}

/// Outcome of one calibrated test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    #[serde(rename = "B")]
    pub b: usize,
    /// Replicates dropped after a failed re-estimation.
    pub dropped: usize,
    pub alpha: f64,
    pub calibration: Calibration,
    pub seed: Option<u64>,
}

impl TestResult {
    pub fn reject(&self) -> bool {
        self.p_value <= self.alpha
    }

    pub const CSV_HEADER: &'static str = "method,statistic,p_value,critical_value,B,alpha,calibration,seed";

    pub fn csv_row(&self) -> String {
        use crate::sde::fmt_full;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            fmt_full(self.statistic),
            fmt_full(self.p_value),
            fmt_full(self.critical_value),
            self.b,
            self.alpha,
            self.calibration,
            self.seed.map(|s| s.to_string()).unwrap_or_default()
        )
    }
}
