use thiserror::Error;

/// Rejections raised while building configurations, grids or analysis requests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} = {value} violates rule: {rule}")]
    Invariant {
        field: String,
        rule: String,
        value: String,
    },
    #[error("sweep grid `{0}` contains no points")]
    EmptyGrid(String),
    #[error("cannot merge sweep results over different grids")]
    GridMismatch,
    #[error("{0}")]
    Other(String),
}

impl ConfigError {
    pub(crate) fn invariant(field: &str, rule: &str, value: impl ToString) -> Self {
        ConfigError::Invariant {
            field: field.to_string(),
            rule: rule.to_string(),
            value: value.to_string(),
        }
    }
}

/// Rejections raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory classification needs a run ending in a convention, found {0}")]
    NotConvention(String),
    #[error("no snapshots to analyze")]
    NoSnapshots,
    #[error("tie threshold multiple must be > 0, got {0}")]
    InvalidTieThreshold(f64),
    #[error("bin width must be > 0, got {0}")]
    InvalidBinWidth(f64),
    #[error("edge probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error(transparent)]
    Thresholds(#[from] ConfigError),
}
