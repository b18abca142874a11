use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("field is identically zero; ratio undefined")]
    ZeroField,
    #[error("empty ball lattice")]
    EmptyLattice,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("trajectory does not cover the requested cylinder: {0}")]
    CoverageFailure(String),
    #[error("spin field too close to the south pole: m3 = {m3} at point {index}")]
    PoleProximity { index: usize, m3: f64 },
    #[error("time derivative is not tangential: max |<dt_m, m>| = {0}")]
    NonTangential(f64),
    #[error("Picard increments grew for 3 consecutive iterations (iteration {iteration}, increment {increment})")]
    NonContraction { iteration: usize, increment: f64 },
    #[error("blow-up suspected at t = {t} (last good time {last_good_t})")]
    BlowupSuspected { t: f64, last_good_t: f64 },
    #[error("mollified field leaves the shell 3/4 <= |m| <= 1: min |m| = {min_norm}")]
    MollificationTooWeak { min_norm: f64 },
    #[error("time step {dt} exceeds the stability cap {cap}")]
    StepTooLarge { dt: f64, cap: f64 },
    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
