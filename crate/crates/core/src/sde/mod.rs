//! Diffusion models and sample-path simulation.

mod car;
mod ctar;
mod density;
mod model;
mod path;
mod regression;
mod simulate;

pub use car::{simulate_car, CarSpec};
pub(crate) use car::companion;
pub use ctar::{simulate_ctar1, Ctar1Spec, CTAR_SUBSTEPS};
pub use density::{stationary_density, StationaryDensity, Support};
pub use model::*;
pub use path::{fmt_full, Path};
pub use regression::{to_regression, RegressionSample};
pub use simulate::*;

/// Observations discarded before recording the CAR and CTAR generators.
pub const BURN_IN: usize = 1000;
