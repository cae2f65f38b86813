use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("functional is not a character (residual {residual:e})")]
    NotCharacter { residual: f64 },

    #[error("no representation solves the cocycle relation (residual {residual:e})")]
    InconsistentPi { residual: f64 },

    #[error("functional is not generating: {0}")]
    NotGenerating(String),

    #[error("map is not *-homomorphic (residual {residual:e})")]
    NotStarHomomorphic { residual: f64 },

    #[error("matrix is not an isometry (residual {residual:e})")]
    NotIsometry { residual: f64 },

    #[error("step too large: h*|xi|^2 = {value} > 1")]
    StepTooLarge { value: f64 },

    #[error("tensor size {required} exceeds budget {budget}")]
    Budget { required: usize, budget: usize },

    #[error("step function has unbounded support")]
    UnboundedSupport,

    #[error("time {t} lies beyond the horizon {horizon}")]
    Horizon { t: f64, horizon: f64 },

    #[error("time {t} is within {h} of breakpoint {breakpoint}")]
    BreakpointCollision { t: f64, h: f64, breakpoint: f64 },

    #[error("witness shape error: {0}")]
    WitnessShape(String),

    #[error("map is not completely positive (Choi minimum eigenvalue {min_eig:e})")]
    NotCompletelyPositive { min_eig: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
