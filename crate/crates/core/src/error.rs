use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("simulation diverged at step {step} (state {value})")]
    SimulationDiverged { step: usize, value: f64 },

    #[error("normalization failed: {0}")]
    NormalizationFailed(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("fitted model is not stationary: {0}")]
    NonstationaryFit(String),

    #[error("continuous-time root mapping failed: {0}")]
    MappingFailed(String),

    #[error("value outside the model domain: {0}")]
    Domain(String),

    #[error("no local data at x = {x}")]
    NoLocalData { x: f64 },

    #[error("diffusion below floor at index {index} (value {value})")]
    DivisionGuard { index: usize, value: f64 },

    #[error("marks have zero variance")]
    DegenerateMarks,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("calibration unstable: {dropped} of {requested} replicates failed")]
    CalibrationUnstable { dropped: usize, requested: usize },

    #[error("scenario aborted: {failed} of {reps} replicates failed ({last})")]
    ScenarioAborted {
        failed: usize,
        reps: usize,
        last: String,
    },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }
}
