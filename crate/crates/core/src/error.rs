use thiserror::Error;

/// Errors surfaced by the library.
///
/// The CLI maps these onto process exit codes: configuration and input
/// problems exit with 1, numerical failures with 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The variational energy did not settle under basis enlargement.
    #[error("radial solver did not converge: {0}")]
    Resolution(String),

    /// An operation was asked to run on an unconverged or otherwise
    /// unusable solution.
    #[error("state error: {0}")]
    State(String),

    /// Angular momentum too high for the angular sample count.
    #[error("angular aliasing: {0}")]
    Aliasing(String),

    /// A trace-normalized channel quantity was requested for a channel
    /// with (numerically) zero occupancy.
    #[error("undefined channel: {0}")]
    UndefinedChannel(String),

    /// A quantity violated an identity it must satisfy; signals broken
    /// normalization upstream rather than bad user input.
    #[error("consistency violation: {0}")]
    Consistency(String),

    #[error("extrapolation quality: {0}")]
    Extrapolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable code for error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "invalid_config",
            Error::InvalidInput(_) => "invalid_input",
            Error::Numerical(_) => "numerical",
            Error::Resolution(_) => "resolution",
            Error::State(_) => "state",
            Error::Aliasing(_) => "aliasing",
            Error::UndefinedChannel(_) => "undefined_channel",
            Error::Consistency(_) => "consistency",
            Error::Extrapolation(_) => "extrapolation",
        }
    }

    /// Process exit code for the CLI: 1 for bad config/input, 2 for
    /// numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) => 1,
            _ => 2,
        }
    }
}
