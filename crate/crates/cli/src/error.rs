use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("admissibility: {0}")]
    Admissibility(String),
    #[error("solver: {0}")]
    Diverged(String),
    #[error(transparent)]
    Core(oseen2d::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Admissibility(_) => 3,
            Self::Diverged(_) => 4,
            Self::Core(_) | Self::Io(_) => 1,
        }
    }
}

impl From<oseen2d::Error> for CliError {
    fn from(e: oseen2d::Error) -> Self {
        use oseen2d::Error as E;
        match e {
            E::OutsideWindow(_) | E::Gate(_) => Self::Admissibility(e.to_string()),
            E::InvalidGrid(_) | E::Exponent { .. } | E::InvalidParameter(_) | E::NonDyadic(_) | E::EmptyEnsemble => {
                Self::Config(e.to_string())
            }
            other => Self::Core(other),
        }
    }
}
