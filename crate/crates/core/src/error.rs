use thiserror::Error;

/// Errors produced anywhere in the post-processing pipeline.
#[derive(Debug, Error)]
pub enum RtoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown group {group} (model has {groups} groups)")]
    UnknownGroup { group: usize, groups: usize },

    #[error("missing field: {0}")]
    MissingField(String),

    #[error("group {0} has no examples")]
    EmptyGroup(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("degenerate constraint in group {0}: every coefficient is zero")]
    DegenerateConstraint(usize),

    #[error("unsupported criterion: {0}")]
    UnsupportedCriterion(String),

    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    #[error("unsupported model format version {0}")]
    Version(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("splits overlap: {0}")]
    Disjointness(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RtoError>;

pub(crate) fn invalid(msg: impl Into<String>) -> RtoError {
    RtoError::InvalidParameter(msg.into())
}
