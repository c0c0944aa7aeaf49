use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The Osgood transform is unavailable, so the moment criterion cannot be formed.
    #[error("criterion inapplicable: {0}")]
    CriterionInapplicable(String),

    #[error(
        "under-resolved grid: {reason} (suggested half-width {suggested_half_width}, \
         suggested points per axis {suggested_points})"
    )]
    Resolution {
        reason: String,
        suggested_half_width: f64,
        suggested_points: usize,
    },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
