use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped so the command-line front end can map them onto
/// exit codes: usage problems, numerical failures and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero frequency is not in the observed set")]
    ZeroFrequencyMissing,

    #[error("observed data is not Hermitian consistent at frequency {index} (mismatch {mismatch:e})")]
    HermitianInconsistent { index: usize, mismatch: f64 },

    #[error("inverse DFT left an imaginary residual {residual:e} above the allowed {allowed:e}")]
    ImaginaryResidual { residual: f64, allowed: f64 },

    #[error("field is not in the shrinkage preimage set for the given support: {0}")]
    OutsideShrinkageSet(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("state translation needs the previous iterate, which this state does not carry")]
    MissingHistory,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("subspaces intersect: all {count} singular values are above the intersection threshold")]
    IntersectionFillsSpace { count: usize },

    #[error("no linear convergence regime found: {0}")]
    NoLinearRegime(String),

    #[error("bundle format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checksum failure: {0}")]
    Checksum(String),

    #[error("malformed bundle: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the numbers themselves rather than by
    /// inputs or the filesystem.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ImaginaryResidual { .. }
                | Error::OutsideShrinkageSet(_)
                | Error::NonFinite(_)
                | Error::Diverged(_)
                | Error::Degenerate(_)
                | Error::IntersectionFillsSpace { .. }
                | Error::NoLinearRegime(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::VersionMismatch { .. }
                | Error::Checksum(_)
                | Error::Format(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
