use thiserror::Error;

/// Failure of a planning computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    /// An argument lies outside the domain where the model is defined.
    #[error("{quantity} out of domain: {detail}")]
    Domain {
        quantity: &'static str,
        detail: String,
    },
    /// A lookup table has no row for the requested key.
    #[error("no table row for {0}")]
    MissingRow(String),
    /// The available path loss cannot close even the shortest valid link.
    #[error("no coverage: available path loss {apl_db:.4} dB is below the {floor_db:.4} dB needed at the minimum distance")]
    NoCoverage { apl_db: f64, floor_db: f64 },
}

impl PlanError {
    pub(crate) fn domain(quantity: &'static str, detail: impl Into<String>) -> Self {
        PlanError::Domain {
            quantity,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = PlanError> = std::result::Result<T, E>;

/// File-system failure with the offending path attached.
#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct IoError {
    pub path: std::path::PathBuf,
    #[source]
    pub source: std::io::Error,
}

impl IoError {
    pub fn new(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Self {
            path: path.into(),
            source,
        }
    }
}
