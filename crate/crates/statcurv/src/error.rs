use thiserror::Error;

/// Errors surfaced by the library. CLI maps these onto exit code 2; failed
/// mathematical checks are report content, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("coordinate index {index} out of range for dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("domain error in `{subexpr}`: {message}")]
    EvalDomain { subexpr: String, message: String },

    #[error("malformed manifold spec: {0}")]
    BadSpec(String),

    #[error("connection has torsion: {0}")]
    Torsion(String),

    #[error("metric not positive definite at {point:?}")]
    NotSpd { point: Vec<f64> },

    #[error("point {point:?} outside chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("operation requires dimension >= {required}, structure has n = {actual}")]
    Dimension { required: usize, actual: usize },

    #[error("transform not expressible in closed form: {0}")]
    NonSerializable(String),

    #[error("alpha={0} has no conformal-projective embedding (only alpha = 1)")]
    UnsupportedAlpha(f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
