//! Core DAG ledger for Tangle-style consensus: hash-identified storage units,
//! tip tracking, reachability queries, and cumulative-weight confirmation.
//!
//! The ledger is append-only. Every unit except the genesis references one or
//! more parents that must already be stored, so the parent relation is acyclic
//! by construction. Cumulative weights are maintained incrementally: inserting
//! a unit adds its own weight to every ancestor.

mod error;
mod id;
mod ledger;
mod unit;

pub use error::DagError;
pub use id::{digest, UnitId};
pub use ledger::{InsertOutcome, TangleLedger};
pub use unit::{
    canonical_preimage, time_to_millis, NodeId, Payload, Preimage, TangleUnit, Transaction,
    GENESIS_ISSUER,
};
