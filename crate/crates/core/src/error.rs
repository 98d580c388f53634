use thiserror::Error;

/// Errors raised by the sampling, reconstruction and detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("angle {0} rad is outside the scannable range [-pi/2, pi/2]")]
    AngleOutOfRange(f64),

    #[error("non-physical NAF {naf}: magnitude exceeds d/lambda = {limit}")]
    NonPhysicalNaf { naf: f64, limit: f64 },

    #[error("degenerate geometry: TX and RX rays are parallel")]
    ParallelRays,

    #[error("no forward intersection: the rays meet behind an array")]
    NoForwardIntersection,

    #[error("point ({x}, {y}) lies outside the forward half-plane of an array")]
    OutsideForwardHalfPlane { x: f64, y: f64 },

    #[error("invalid array configuration: {0}")]
    InvalidArray(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sampling domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
