use std::fmt;
use std::process::ExitCode;

use hexflood_core::Error;

/// A command failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config, or input file contents (exit 2).
    Usage(String),
    /// Elevation service unreachable or misbehaving (exit 3).
    Network(String),
    /// Terrain or data that cannot be simulated (exit 4).
    Data(String),
    /// Reading or writing files (exit 5).
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 2,
            Failure::Network(_) => 3,
            Failure::Data(_) => 4,
            Failure::Io(_) => 5,
        })
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{context}: {err}"))
    }

    /// Maps a library error that came from processing `context`.
    pub fn from_core(context: impl fmt::Display, err: Error) -> Self {
        let msg = format!("{context}: {err}");
        match err {
            Error::InvalidArgument(_) => Failure::Usage(msg),
            Error::Unavailable(_) | Error::Protocol(_) => Failure::Network(msg),
            Error::Io(_) => Failure::Io(msg),
            Error::Parse { .. }
            | Error::Resource(_)
            | Error::OutOfBounds { .. }
            | Error::DataGap { .. } => Failure::Data(msg),
        }
    }

    /// Like [`Failure::from_core`], but treats malformed input as a usage error.
    pub fn from_input(context: impl fmt::Display, err: Error) -> Self {
        match err {
            Error::Parse { .. } => Failure::Usage(format!("{context}: {err}")),
            other => Failure::from_core(context, other),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Network(m) | Failure::Data(m) | Failure::Io(m) => {
                f.write_str(m)
            }
        }
    }
}
