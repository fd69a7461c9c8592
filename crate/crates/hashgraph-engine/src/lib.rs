//! Hashgraph consensus: gossip-about-gossip event graphs, witness and
//! famous-witness election through virtual voting, and a deterministic
//! total order over confirmed events.
//!
//! Every node holds its own [`HashgraphView`]. Syncs transfer the sender's
//! full event set (ancestor-closed), the receiver records one new event per
//! sync, and all consensus values — round, witness flag, fame, order — are
//! pure functions of an event's ancestry, so independently grown views
//! agree wherever they both decide.

mod consensus;
mod event;
mod gossip;
mod view;

pub use event::{Event, EventId, Fame};
pub use gossip::{gossip_sync, SyncOutcome, WireEventSize};
pub use view::HashgraphView;

pub use consensus::{assign_rounds, elect_fame, order_events};

/// `count` is a supermajority of `population`: more than two thirds.
pub(crate) fn supermajority(count: u32, population: u32) -> bool {
    3 * count > 2 * population
}
