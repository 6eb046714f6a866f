use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("maze generation failed after {retries} attempts: {reason}")]
    GenerationFailed { retries: usize, reason: String },

    #[error("invalid maze: {0}")]
    InvalidMaze(String),

    #[error("cell ({row}, {col}) lies outside a {size}x{size} grid")]
    OutOfGrid { row: usize, col: usize, size: usize },

    #[error("denoising step {step} outside schedule 1..={steps}")]
    StepOutOfRange { step: u32, steps: u32 },

    #[error("start and goal coincide; confidence is undefined")]
    DegenerateMaze,

    #[error("budget of {budget} NFEs cannot complete {beam} candidates of {steps} steps")]
    BudgetInfeasible { budget: u64, beam: usize, steps: u32 },

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("convergence undefined: energy map has no motion")]
    UndefinedConvergence,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
