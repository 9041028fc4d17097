use thiserror::Error;

/// Failure of a command, carrying its exit status class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or usage: exit 2.
    #[error("{0}")]
    Config(String),

    /// Invalid or unreadable data: exit 1.
    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] bakesynth::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 1,
            CliError::Core(e) => match e {
                bakesynth::Error::Config(_) | bakesynth::Error::UnknownClass(_) => 2,
                _ => 1,
            },
        }
    }
}
