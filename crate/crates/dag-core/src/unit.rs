use crate::id::{digest, UnitId};

/// Issuing node identifier.
pub type NodeId = u32;

/// Issuer id recorded on the genesis unit.
pub const GENESIS_ISSUER: NodeId = 0;

/// A value transfer. Two transactions conflict iff they consume the same
/// output while living in distinct units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub sender: NodeId,
    pub consumed_output: u64,
    pub amount: u64,
}

/// Unit payload: either a transaction or a zero-value marker (used by the
/// coordinator and the genesis).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    Transaction(Transaction),
    ZeroValue,
}

impl Payload {
    pub fn consumed_output(&self) -> Option<u64> {
        match self {
            Payload::Transaction(tx) => Some(tx.consumed_output),
            Payload::ZeroValue => None,
        }
    }

    pub fn is_zero_value(&self) -> bool {
        matches!(self, Payload::ZeroValue)
    }
}

/// One vertex of the Tangle DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct TangleUnit {
    pub id: UnitId,
    pub issuer: NodeId,
    /// Parent approvals in selection order, deduplicated. Empty only for the
    /// genesis unit.
    pub parents: Vec<UnitId>,
    pub payload: Payload,
    pub own_weight: u64,
    pub nonce: u64,
    /// Simulated signature over the id preimage.
    pub signature: [u8; 32],
    /// Simulation time in seconds.
    pub issued_at: f64,
}

impl TangleUnit {
    /// Rebuilds the canonical id preimage from the unit's own fields.
    pub fn preimage(&self) -> Preimage {
        canonical_preimage(
            self.issuer,
            &self.parents,
            &self.payload,
            self.own_weight,
            self.nonce,
            self.issued_at,
        )
    }
}

/// Canonical serialization of a unit, excluding id and signature. Hashing it
/// yields the unit id; the nonce sits at a fixed offset so puzzle search can
/// patch it in place.
#[derive(Clone, Debug)]
pub struct Preimage {
    bytes: Vec<u8>,
    nonce_offset: usize,
}

impl Preimage {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn set_nonce(&mut self, nonce: u64) {
        self.bytes[self.nonce_offset..self.nonce_offset + 8].copy_from_slice(&nonce.to_le_bytes());
    }

    pub fn id(&self) -> UnitId {
        UnitId(digest(&self.bytes))
    }
}

/// Seconds to the 64-bit fixed-point millisecond representation used by the
/// canonical serialization.
pub fn time_to_millis(seconds: f64) -> u64 {
    (seconds * 1000.0).round() as u64
}

fn push_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

/// Builds the canonical preimage: fixed field order (issuer, parents sorted
/// ascending by byte value, payload, own weight, nonce, issue time in
/// milliseconds), every field length-prefixed.
pub fn canonical_preimage(
    issuer: NodeId,
    parents: &[UnitId],
    payload: &Payload,
    own_weight: u64,
    nonce: u64,
    issued_at: f64,
) -> Preimage {
    let mut bytes = Vec::with_capacity(64 + parents.len() * 32);
    push_field(&mut bytes, &issuer.to_le_bytes());

    let mut sorted: Vec<&UnitId> = parents.iter().collect();
    sorted.sort();
    let mut parent_bytes = Vec::with_capacity(sorted.len() * 32);
    for parent in sorted {
        parent_bytes.extend_from_slice(parent.as_bytes());
    }
    push_field(&mut bytes, &parent_bytes);

    let mut payload_bytes = Vec::with_capacity(21);
    match payload {
        Payload::ZeroValue => payload_bytes.push(0),
        Payload::Transaction(tx) => {
            payload_bytes.push(1);
            payload_bytes.extend_from_slice(&tx.sender.to_le_bytes());
            payload_bytes.extend_from_slice(&tx.consumed_output.to_le_bytes());
            payload_bytes.extend_from_slice(&tx.amount.to_le_bytes());
        }
    }
    push_field(&mut bytes, &payload_bytes);

    push_field(&mut bytes, &own_weight.to_le_bytes());
    let nonce_offset = bytes.len() + 4;
    push_field(&mut bytes, &nonce.to_le_bytes());
    push_field(&mut bytes, &time_to_millis(issued_at).to_le_bytes());

    Preimage { bytes, nonce_offset }
}
