use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(fou_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Input { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Parameter errors are usage errors; everything else the core reports is numerical.
impl From<fou_core::Error> for CliError {
    fn from(e: fou_core::Error) -> Self {
        use fou_core::Error as E;
        match e {
            E::HurstOutOfRange(_) | E::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
