//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis size must be even and >= 2, got {0}")]
    InvalidBasisSize(usize),

    #[error("singular design matrix in least-squares fit")]
    SingularFit,

    #[error("not enough samples: need at least {needed}, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("degenerate curve: zero scale (point curve)")]
    DegenerateCurve,

    #[error("rotation angle is ambiguous (template orthogonal to curve under all rotations)")]
    AmbiguousAngle,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("no contour: image contains no foreground pixels")]
    NoContour,

    #[error("degenerate contour: foreground component too small to trace")]
    DegenerateContour,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) | Error::NoContour | Error::DegenerateContour => 3,
            Error::Domain { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidBasisSize(_)
            | Error::NotEnoughSamples { .. } => 2,
            Error::SingularFit
            | Error::DegenerateCurve
            | Error::AmbiguousAngle
            | Error::Model(_) => 4,
        }
    }
}
