//! Monte Carlo size and power experiments.

mod config;
mod report;
mod run;

pub use config::{HarnessConfig, Scenario};
pub use report::{McCell, McReport};
pub use run::{
    car_replicate, diffusion_replicate, dimension_table, power_table, replicate_stream, run_config, run_scenario,
    simulate_scenario, size_table, ReplicateOutcome, CTAR_POWER, MAX_FAILED_SHARE, OU_SIZE, REFLECT_FLOOR,
    SCENARIO_X0,
};
