use thiserror::Error;

/// Errors raised while validating parameters, allocating structures or
/// generating and loading worlds.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates one of its invariants. `name` is the parameter's
    /// configuration key.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot allocate a grid of {voxels} voxels")]
    Allocation { voxels: u64 },

    #[error("map generation failed: {0}")]
    Generation(String),

    #[error("malformed map file: {0}")]
    MapFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
