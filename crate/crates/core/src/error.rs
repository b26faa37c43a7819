use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Every column holds a single distinct value over the rows of a node.
    #[error("all columns constant")]
    AllColumnsConstant,

    /// The projected values of a node are all equal, so no threshold separates them.
    #[error("constant projection")]
    ConstantProjection,

    #[error("no eligible column: every selection weight is zero")]
    NoEligibleColumn,

    #[error("nothing to split: every column of the dataset is constant")]
    NothingToSplit,

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid data at row {row}, column '{column}': {reason}")]
    InvalidData { row: usize, column: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("labels contain a single class; ranking metrics need both")]
    SingleClass,

    #[error("model format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable one-word tag used by the command line for machine-readable failures.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::AllColumnsConstant | Error::ConstantProjection | Error::NothingToSplit => "degenerate-data",
            Error::NoEligibleColumn => "degenerate-weights",
            Error::DimensionMismatch { .. } => "dimension",
            Error::InvalidData { .. } => "data",
            Error::Config(_) => "config",
            Error::SingleClass => "labels",
            Error::Format(_) | Error::Json(_) => "format",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
