use gmbounds_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("statistical checks failed: {0}")]
    Statistical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 parse/usage, 3 infeasible, 4 non-convergence, 5 statistical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Statistical(_) => 5,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Bracket(_) | CoreError::BelowStabilityFloor { .. } | CoreError::CostAtFloor { .. } => 3,
                CoreError::NotConverged { .. } => 4,
                _ => 2,
            },
        }
    }
}
