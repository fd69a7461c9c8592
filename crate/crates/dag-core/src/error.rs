use crate::id::UnitId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DagError {
    #[error("unknown parent {0}")]
    UnknownParent(UnitId),
    #[error("duplicate unit {0}")]
    DuplicateUnit(UnitId),
    #[error("unknown unit {0}")]
    UnknownUnit(UnitId),
    #[error("non-genesis unit has no parents")]
    ParentlessUnit,
}
