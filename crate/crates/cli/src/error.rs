use std::io;
use std::path::PathBuf;

use thiserror::Error;

use cw_spectra::CwError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CwError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2: bad arguments or input, 3: numerical failure, 4: I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CwError::Domain(_) | CwError::Input(_) | CwError::CapExceeded { .. } => 2,
                CwError::Numerical(_) | CwError::Quadrature { .. } => 3,
                CwError::Io(_) | CwError::Csv(_) | CwError::Json(_) => 4,
            },
            CliError::Io { .. } => 4,
        }
    }
}
