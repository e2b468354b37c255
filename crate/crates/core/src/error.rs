use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("pulse does not fit inside the time window: {0}")]
    WindowTooSmall(String),

    #[error("time step too coarse: tau_p = {tau_p} needs dt <= {max_dt}, got {dt}")]
    StepTooCoarse { tau_p: f64, dt: f64, max_dt: f64 },

    #[error("envelopes live on different time grids")]
    GridMismatch,

    #[error("invalid cavity parameters: {0}")]
    InvalidParams(String),

    #[error(
        "sector M={m} has not decayed by the end of the window \
         (|c_cav| = {cav:.3e}, |c_exc| = {exc:.3e}); extend the window"
    )]
    NonConvergent { m: u32, cav: f64, exc: f64 },

    #[error("closed-form output requires gamma3 == kappa (got gamma3 = {gamma3}, kappa = {kappa})")]
    InvalidRegime { gamma3: f64, kappa: f64 },

    #[error("herald probability {0:e} is too small to condition on")]
    VanishingProbability(f64),

    #[error("amplitudes are not normalized (squared norm = {0})")]
    NotNormalized(f64),

    #[error("invalid atom weights: {0}")]
    InvalidWeights(String),

    #[error("invalid cloud specification: {0}")]
    InvalidCloud(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sweep failed at grid index {index} (value {value}): {source}")]
    SweepPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}
