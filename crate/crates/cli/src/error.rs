use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot read input: {0}")]
    Input(String),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error(transparent)]
    Core(#[from] frechet::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 1: checks failed, 2: invalid config or input, 3: zero evidence, 4: other failures.
    pub fn exit_code(&self) -> i32 {
        use frechet::Error as E;
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Core(E::ZeroEvidence(_)) => 3,
            CliError::Core(
                E::InvalidMeasure(_)
                | E::GridMismatch { .. }
                | E::OutOfRange { .. }
                | E::InvalidParameter(_)
                | E::DependentCoefficients
                | E::UnknownName { .. }
                | E::Config(_)
                | E::Json(_),
            ) => 2,
            CliError::Core(_) | CliError::Output(_) => 4,
        }
    }
}
