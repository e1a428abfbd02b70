use std::path::PathBuf;

/// Errors surfaced by the engine. `is_user_error` distinguishes bad input
/// (exit code 1 in the CLI) from internal failures (exit code 2).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error("validation failed for {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: String, reason: String },

    #[error("no LiDAR data")]
    NoLidarData,

    #[error("insufficient prior points: {got} (need at least {need})")]
    InsufficientPriorPoints { got: usize, need: usize },

    #[error("insufficient object views: {got} (need at least {need})")]
    InsufficientObjectViews { got: usize, need: usize },

    #[error("object {0} never visible")]
    ObjectNeverVisible(String),

    #[error("object id collision: {0}")]
    ObjectIdCollision(String),

    #[error("empty bin {index}: no views assigned")]
    EmptyBin { index: usize },

    #[error("timestep {timestep} not active for object {object_id}")]
    InactiveTimestep { object_id: String, timestep: i64 },

    #[error("non-finite gradient in parameter group {0}")]
    NonFiniteGradient(String),

    #[error("image shape mismatch: {a} vs {b}")]
    ShapeMismatch { a: String, b: String },

    #[error("empty prior point cloud")]
    EmptyPrior,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn load(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Self::Load { path: path.into(), reason: reason.into() }
    }

    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Validation { field: field.into(), reason: reason.into() }
    }

    pub fn parameter(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Parameter { name: name.into(), reason: reason.into() }
    }

    /// True when the error is attributable to user input rather than a bug.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Self::Other(_) | Self::NonFiniteGradient(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
