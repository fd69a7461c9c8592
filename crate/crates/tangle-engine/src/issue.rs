use dag_core::{digest, NodeId, Payload, Preimage, TangleLedger, TangleUnit, UnitId};
use rand::Rng;

use crate::selection::{select_tips, TipFilter, TipSelectionAlgo};
use crate::EngineError;

/// Nonce puzzle: the unit hash must carry at least `difficulty_bits` leading
/// zero bits. Deliberately cheap ("very low difficulty"), it exists to make
/// spamming non-free, not to gate issuance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoWPuzzle {
    pub difficulty_bits: u32,
}

impl Default for PoWPuzzle {
    fn default() -> Self {
        Self { difficulty_bits: 8 }
    }
}

impl PoWPuzzle {
    pub fn new(difficulty_bits: u32) -> Self {
        assert!(
            difficulty_bits >= 1 && difficulty_bits <= 32,
            "difficulty_bits must be in 1..=32"
        );
        Self { difficulty_bits }
    }

    pub fn check(&self, id: UnitId) -> bool {
        id.leading_zero_bits() >= self.difficulty_bits
    }

    /// Patches nonces into the preimage until the hash meets the target.
    /// Returns the winning nonce and the number of attempts.
    pub fn solve(&self, preimage: &mut Preimage, rng: &mut impl Rng) -> (u64, u64) {
        let mut nonce: u64 = rng.gen();
        let mut attempts = 0u64;
        loop {
            attempts += 1;
            preimage.set_nonce(nonce);
            if self.check(preimage.id()) {
                return (nonce, attempts);
            }
            nonce = nonce.wrapping_add(1);
        }
    }
}

/// Deterministic per-node signing key. Anyone can re-derive it, which is the
/// point: the artifact tests protocol logic, not cryptography.
pub fn issuer_secret(issuer: NodeId) -> [u8; 32] {
    let mut buf = Vec::with_capacity(20);
    buf.extend_from_slice(b"issuer-secret:");
    buf.extend_from_slice(&issuer.to_le_bytes());
    digest(&buf)
}

/// Simulated signature: hash of the issuer secret followed by the id
/// preimage. Verification recomputes it.
pub fn sign_preimage(issuer: NodeId, preimage: &Preimage) -> [u8; 32] {
    let mut buf = Vec::with_capacity(32 + preimage.bytes().len());
    buf.extend_from_slice(&issuer_secret(issuer));
    buf.extend_from_slice(preimage.bytes());
    digest(&buf)
}

/// Assembles a unit with the given parents: solves the puzzle, derives the
/// id, signs. Used directly by callers that pick parents themselves
/// (coordinator, attacker); honest issuance goes through [`issue_unit`].
pub fn build_unit(
    issuer: NodeId,
    parents: Vec<UnitId>,
    payload: Payload,
    puzzle: &PoWPuzzle,
    now: f64,
    rng: &mut impl Rng,
) -> TangleUnit {
    let own_weight = 1;
    let mut preimage = dag_core::canonical_preimage(issuer, &parents, &payload, own_weight, 0, now);
    let (nonce, _attempts) = puzzle.solve(&mut preimage, rng);
    let id = preimage.id();
    let signature = sign_preimage(issuer, &preimage);
    TangleUnit {
        id,
        issuer,
        parents,
        payload,
        own_weight,
        nonce,
        signature,
        issued_at: now,
    }
}

/// The four-step issuance procedure: select tips, store the payload, solve
/// the puzzle, sign. Broadcasting is the caller's job.
pub fn issue_unit<F: TipFilter>(
    issuer: NodeId,
    ledger: &TangleLedger,
    payload: Payload,
    algo: &TipSelectionAlgo,
    puzzle: &PoWPuzzle,
    filter: &F,
    now: f64,
    rng: &mut impl Rng,
) -> Result<TangleUnit, EngineError> {
    let parents = select_tips(ledger, algo, rng, filter)?;
    Ok(build_unit(issuer, parents, payload, puzzle, now, rng))
}
