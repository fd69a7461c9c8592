//! Tangle consensus protocol on top of [`dag_core`]: the issuance procedure
//! (tip selection, nonce puzzle, simulated signature), unit validation,
//! double-spend bookkeeping and resolution, and the coordinator that keeps
//! confirmation moving under low load.
//!
//! All randomness flows through explicit generators passed by the caller, so
//! every code path is deterministic for a fixed seed.

mod conflicts;
mod coordinator;
mod issue;
mod selection;
mod validate;

pub use conflicts::{resolve_conflicts, ConflictTracker};
pub use coordinator::{coordinator_tick, Coordinator};
pub use issue::{build_unit, issue_unit, issuer_secret, sign_preimage, PoWPuzzle};
pub use selection::{
    select_lazy_parents, select_tips, NoConflicts, SelectionVariant, TipFilter, TipSelectionAlgo,
};
pub use validate::{validate_unit, RejectReason, Validation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("no valid tips available")]
    NoValidTips,
    #[error("empty conflict set")]
    EmptyConflictSet,
    #[error(transparent)]
    Dag(#[from] dag_core::DagError),
}
