use std::io;

use thiserror::Error;

use crate::hexgrid::AxialCoord;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("hex cell {cell} falls outside the raster bounding box")]
    OutOfBounds { cell: AxialCoord },

    #[error("hex cell {cell} touches a nodata raster node")]
    DataGap { cell: AxialCoord },

    #[error("elevation service unavailable: {0}")]
    Unavailable(String),

    #[error("elevation service protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
