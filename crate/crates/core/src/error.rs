use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("feature descriptor mismatch: model expects {expected:#018x}, got {got:#018x}")]
    DescriptorMismatch { expected: u64, got: u64 },

    #[error("unsupported model version {got} (expected {expected})")]
    UnsupportedVersion { expected: u32, got: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
