use std::fmt;

use dag_core::{digest, time_to_millis, NodeId, Transaction};

/// 32-byte event identifier (hash of the event's canonical bytes).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub [u8; 32]);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in &self.0 {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in &self.0[..4] {
            write!(f, "{byte:02x}")?;
        }
        write!(f, "..")
    }
}

/// Outcome of a famous-witness election.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fame {
    Undecided,
    Famous,
    NotFamous,
}

impl Fame {
    pub fn letter(&self) -> char {
        match self {
            Fame::Undecided => 'U',
            Fame::Famous => 'F',
            Fame::NotFamous => 'N',
        }
    }
}

/// One gossip event: what the creator knew, when it claims it knew it.
#[derive(Clone, Debug)]
pub struct Event {
    pub id: EventId,
    pub creator: NodeId,
    pub self_parent: Option<EventId>,
    pub other_parent: Option<EventId>,
    pub payload: Vec<Transaction>,
    pub claimed_time: f64,
    pub signature: [u8; 32],
    /// Computed by round assignment.
    pub round: u32,
    pub is_witness: bool,
    pub fame: Fame,
    pub consensus_time: Option<f64>,
    pub order_index: Option<u64>,
}

pub(crate) fn event_preimage(
    creator: NodeId,
    self_parent: Option<EventId>,
    other_parent: Option<EventId>,
    payload: &[Transaction],
    claimed_time: f64,
) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(96 + payload.len() * 20);
    let mut field = |buf: &mut Vec<u8>, data: &[u8]| {
        buf.extend_from_slice(&(data.len() as u32).to_le_bytes());
        buf.extend_from_slice(data);
    };
    field(&mut bytes, &creator.to_le_bytes());
    field(&mut bytes, self_parent.map(|p| p.0).unwrap_or_default().as_slice());
    field(&mut bytes, other_parent.map(|p| p.0).unwrap_or_default().as_slice());
    let mut body = Vec::with_capacity(4 + payload.len() * 20);
    body.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    for tx in payload {
        body.extend_from_slice(&tx.sender.to_le_bytes());
        body.extend_from_slice(&tx.consumed_output.to_le_bytes());
        body.extend_from_slice(&tx.amount.to_le_bytes());
    }
    field(&mut bytes, &body);
    field(&mut bytes, &time_to_millis(claimed_time).to_le_bytes());
    bytes
}

fn member_secret(creator: NodeId) -> [u8; 32] {
    let mut buf = Vec::with_capacity(18);
    buf.extend_from_slice(b"member-secret:");
    buf.extend_from_slice(&creator.to_le_bytes());
    digest(&buf)
}

pub(crate) fn sign_event(creator: NodeId, preimage: &[u8]) -> [u8; 32] {
    let mut buf = Vec::with_capacity(32 + preimage.len());
    buf.extend_from_slice(&member_secret(creator));
    buf.extend_from_slice(preimage);
    digest(&buf)
}

impl Event {
    /// Assembles a signed event; consensus fields start unset.
    pub fn build(
        creator: NodeId,
        self_parent: Option<EventId>,
        other_parent: Option<EventId>,
        payload: Vec<Transaction>,
        claimed_time: f64,
    ) -> Self {
        let preimage = event_preimage(creator, self_parent, other_parent, &payload, claimed_time);
        let id = EventId(digest(&preimage));
        let signature = sign_event(creator, &preimage);
        Event {
            id,
            creator,
            self_parent,
            other_parent,
            payload,
            claimed_time,
            signature,
            round: 0,
            is_witness: false,
            fame: Fame::Undecided,
            consensus_time: None,
            order_index: None,
        }
    }

    /// Copy with consensus fields cleared, as transferred by gossip: the
    /// receiver recomputes them against its own view.
    pub(crate) fn wire_copy(&self) -> Self {
        Event {
            round: 0,
            is_witness: false,
            fame: Fame::Undecided,
            consensus_time: None,
            order_index: None,
            ..self.clone()
        }
    }
}
