use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed scan {}: {len} bytes is not a multiple of 16", path.display())]
    MalformedScan { path: PathBuf, len: u64 },

    #[error("calibration: {0}")]
    CalibParse(String),

    #[error("pose file line {line}: {msg}")]
    PoseParse { line: usize, msg: String },

    #[error("times file line {line}: {msg}")]
    TimesParse { line: usize, msg: String },

    #[error("depth encode: {0}")]
    DepthEncode(String),

    #[error("depth decode: {0}")]
    DepthDecode(String),

    #[error("invalid depth map: {0}")]
    InvalidDepthMap(String),

    #[error("invalid kernel {0:?}")]
    InvalidKernel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("nothing to evaluate: {0}")]
    EmptyEvaluation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    ///
    /// 2 is left to argument parsing, 1 to pipeline runs with failed frames.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MalformedScan { .. }
            | Error::CalibParse(_)
            | Error::PoseParse { .. }
            | Error::TimesParse { .. }
            | Error::DepthDecode(_)
            | Error::InvalidKernel(_)
            | Error::InvalidConfig(_) => 3,
            Error::Shape(_) | Error::InvalidDepthMap(_) | Error::DepthEncode(_) => 4,
            Error::EmptyEvaluation(_) => 5,
            Error::Io { .. } => 6,
        }
    }
}
