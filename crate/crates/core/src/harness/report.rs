use std::io::{self, Write};

use super::config::HarnessConfig;
use crate::gof::{Calibration, Method};

/// One table cell: the rejection rate of a method in a scenario at one
/// sample size (and CAR order).
#[derive(Debug, Clone, PartialEq)]
pub struct McCell {
    pub scenario: String,
    pub n: usize,
    /// CAR order; 0 for the diffusion scenarios.
    pub order: usize,
    pub method: Method,
    pub rejections: usize,
    /// Replicates that completed.
    pub reps: usize,
    /// Replicates that failed (simulation, fit or calibration).
    pub failed: usize,
    pub alpha: f64,
    pub b: usize,
    pub seed: u64,
    pub bandwidth: String,
    pub calibration: Calibration,
    pub wall_time_s: f64,
    /// Per-replicate p-values, in replicate order.
    pub p_values: Vec<f64>,
}

impl McCell {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        scenario: &str,
        n: usize,
        order: usize,
        method: Method,
        rejections: usize,
        reps: usize,
        failed: usize,
        cfg: &HarnessConfig,
        wall_time_s: f64,
        p_values: Vec<f64>,
    ) -> Self {
        Self {
            scenario: scenario.to_string(),
            n,
            order,
            method,
            rejections,
            reps,
            failed,
            alpha: cfg.alpha,
            b: cfg.b,
            seed: cfg.seed,
            bandwidth: if order == 0 { cfg.bandwidth.to_string() } else { "-".into() },
            calibration: if method == Method::Dcov {
                cfg.calibration
            } else {
                Calibration::Bootstrap
            },
            wall_time_s,
            p_values,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.reps == 0 {
            return f64::NAN;
        }
        self.rejections as f64 / self.reps as f64
    }

    /// Binomial standard error `√(r(1-r)/reps)`.
    pub fn se(&self) -> f64 {
        let r = self.rate();
        (r * (1.0 - r) / self.reps as f64).sqrt()
    }
}

/// Rejection rates of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct McReport {
    pub cells: Vec<McCell>,
}

impl McReport {
    pub const CSV_HEADER: &'static str =
        "scenario,n,order,method,reps,rejections,rate,se,alpha,B,seed,bandwidth,calibration,failed,wall_time_s";

    pub fn cell(&self, scenario: &str, n: usize, order: usize, method: Method) -> Option<&McCell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.n == n && c.order == order && c.method == method)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                c.scenario,
                c.n,
                c.order,
                c.method,
                c.reps,
                c.rejections,
                c.rate(),
                c.se(),
                c.alpha,
                c.b,
                c.seed,
                c.bandwidth,
                c.calibration,
                c.failed,
                c.wall_time_s
            )?;
        }
        Ok(())
    }

    /// Whether every table cell agrees, ignoring wall time.
    pub fn same_cells(&self, other: &McReport) -> bool {
        self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                let mut b = b.clone();
                b.wall_time_s = a.wall_time_s;
                *a == b && a.p_values.iter().zip(&b.p_values).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}
