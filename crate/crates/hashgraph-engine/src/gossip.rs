use dag_core::Transaction;

use crate::event::EventId;
use crate::view::HashgraphView;

/// Bytes on the wire per gossiped event: positional information, signature,
/// and the transactions carried in the unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireEventSize {
    pub positional_bytes: u32,
    pub signature_bytes: u32,
    pub payload_bytes: u32,
}

impl Default for WireEventSize {
    fn default() -> Self {
        Self {
            positional_bytes: 4,
            signature_bytes: 64,
            payload_bytes: 100,
        }
    }
}

impl WireEventSize {
    pub fn new(positional_bytes: u32) -> Self {
        assert!(
            (3..=6).contains(&positional_bytes),
            "positional bytes must be in 3..=6"
        );
        Self {
            positional_bytes,
            ..Self::default()
        }
    }

    pub fn per_event_bytes(&self) -> u64 {
        (self.positional_bytes + self.signature_bytes + self.payload_bytes) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncOutcome {
    /// Event the receiver created to record the sync.
    pub new_event: EventId,
    /// Events the receiver lacked.
    pub delta_events: usize,
    pub bytes_transferred: u64,
}

/// One gossip exchange: the sender announces everything it knew at snapshot
/// time (its first `sender_len` events — pass `sender.len()` for "now"),
/// the receiver merges what it lacks and records one new event whose other
/// parent is the sender's latest own event. The merge is idempotent; an
/// empty delta still produces the new event.
pub fn gossip_sync(
    sender: &HashgraphView,
    receiver: &mut HashgraphView,
    sender_len: usize,
    now: f64,
    payload: Vec<Transaction>,
    wire: &WireEventSize,
) -> SyncOutcome {
    assert_ne!(sender.owner(), receiver.owner(), "nodes must be distinct");
    let upto = sender_len.min(sender.len());
    let mut delta = 0u64;
    for ix in 0..upto as u32 {
        let ev = sender.event_at(ix);
        if !receiver.contains(ev.id) {
            receiver.insert_foreign(ev.wire_copy());
            delta += 1;
        }
    }
    let other_parent = latest_own_in_prefix(sender, upto);
    let new_event = receiver.create_event(other_parent, now, payload);
    SyncOutcome {
        new_event,
        delta_events: delta as usize,
        bytes_transferred: delta * wire.per_event_bytes(),
    }
}

fn latest_own_in_prefix(sender: &HashgraphView, upto: usize) -> Option<EventId> {
    (0..upto as u32)
        .rev()
        .map(|ix| sender.event_at(ix))
        .find(|ev| ev.creator == sender.owner())
        .map(|ev| ev.id)
}
