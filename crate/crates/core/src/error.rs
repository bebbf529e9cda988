use thiserror::Error;

use crate::frames::FrameId;

/// Errors produced anywhere in the tracking pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize a zero-norm quaternion")]
    ZeroNorm,
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("matrix is not a rotation (orthonormality error {0:.3e})")]
    NotOrthonormal(f64),
    #[error("frame mismatch: expected {expected:?}, found {found:?}")]
    FrameMismatch { expected: FrameId, found: FrameId },
    #[error("calibration is missing R_GO")]
    CalibrationMissing,
    #[error("invalid filter design: {0}")]
    FilterDesign(String),
    #[error("accelerometer norm {0:.3} m/s^2 outside quasi-static band")]
    NotQuasiStatic(f64),
    #[error("accelerometer and magnetometer are (nearly) parallel")]
    ParallelReferences,
    #[error("invalid detection passed to a correction step")]
    InvalidDetection,
    #[error("non-finite value produced during {stage}")]
    NonFinite { stage: &'static str },
    #[error("innovation covariance is not positive definite during {stage}")]
    NotPositiveDefinite { stage: &'static str },
    #[error("point at or behind the camera plane (z = {0:.3e} m)")]
    BehindCamera(f64),
    #[error("need at least {needed} correspondences, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("pose iteration diverged: {0}")]
    Diverged(String),
    #[error("vision dropout: reprojection RMS {rms:.2} px exceeds {limit:.2} px")]
    VisionDropout { rms: f64, limit: f64 },
    #[error("input stream is not sorted by time at index {0}")]
    Unsorted(usize),
    #[error("{count} IMU samples lie after the last frame")]
    TrailingImu { count: usize },
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { key: key.into(), msg: msg.into() }
    }
}
