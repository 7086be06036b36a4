use alloc::string::String;

use crate::domain::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FoamError {
    #[error("point has dimension {got}, expression needs at least {needed}")]
    DimensionMismatch { needed: usize, got: usize },
    #[error("open set is empty")]
    EmptySet,
    #[error("open set is not contained in the ambient domain")]
    NotContained,
    #[error("cover is empty")]
    EmptyCover,
    #[error("cover does not cover the domain; uncovered point {witness:?}")]
    NotACover { witness: Point },
    #[error("ideal descriptors differ")]
    IdealMismatch,
    #[error("index orders differ")]
    OrderMismatch,
    #[error("singular set is structurally the whole domain")]
    TrivialSingularSet,
    #[error("union is not representable in this family: {0}")]
    JoinNotRepresentable(String),
    #[error("singular set is not dominated by any member of the family")]
    NotDominated,
    #[error("configuration cap must be positive: {0}")]
    ZeroCap(&'static str),
    #[error("sections disagree on an overlap at {point:?} (pieces {left} and {right})")]
    IncompatibleOverlap { left: usize, right: usize, point: Point },
    #[error("partition of unity does not match the cover")]
    PartitionMismatch,
    #[error("a cofinal embedding of the naturals is required")]
    MissingEmbedding,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = FoamError> = core::result::Result<T, E>;
