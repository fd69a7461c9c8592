use std::collections::HashMap;

use dag_core::{TangleLedger, TangleUnit, UnitId};

use crate::conflicts::ConflictTracker;
use crate::issue::{sign_preimage, PoWPuzzle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    BadSignature,
    BadNonce,
    UnknownParent(UnitId),
    ConflictingParents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    Accept,
    Reject(RejectReason),
}

impl Validation {
    pub fn is_accept(&self) -> bool {
        matches!(self, Validation::Accept)
    }
}

/// Receiver-side legality check: signature, nonce difficulty, parent
/// availability, and mutually conflicting parent ancestries. A unit whose id
/// does not match its own preimage counts as tampered (bad signature).
pub fn validate_unit(
    ledger: &TangleLedger,
    unit: &TangleUnit,
    puzzle: &PoWPuzzle,
    tracker: &ConflictTracker,
) -> Validation {
    let preimage = unit.preimage();
    let id = preimage.id();
    if id != unit.id || unit.signature != sign_preimage(unit.issuer, &preimage) {
        return Validation::Reject(RejectReason::BadSignature);
    }
    if !puzzle.check(id) {
        return Validation::Reject(RejectReason::BadNonce);
    }
    for &parent in &unit.parents {
        if !ledger.contains(parent) {
            return Validation::Reject(RejectReason::UnknownParent(parent));
        }
    }
    // The cone scan only matters once a double spend is actually known.
    if tracker.conflict_exists() && parents_conflict(ledger, &unit.parents) {
        return Validation::Reject(RejectReason::ConflictingParents);
    }
    Validation::Accept
}

/// True iff the combined past cone of `parents` contains two distinct units
/// consuming the same output.
fn parents_conflict(ledger: &TangleLedger, parents: &[UnitId]) -> bool {
    let mut spenders: HashMap<u64, u32> = HashMap::new();
    let mut visited = vec![false; ledger.len()];
    let mut stack: Vec<u32> = parents
        .iter()
        .filter_map(|&p| ledger.index_of(p))
        .collect();
    while let Some(ix) = stack.pop() {
        if visited[ix as usize] {
            continue;
        }
        visited[ix as usize] = true;
        if let Some(output) = ledger.unit_at(ix).payload.consumed_output() {
            if let Some(&other) = spenders.get(&output) {
                if other != ix {
                    return true;
                }
            } else {
                spenders.insert(output, ix);
            }
        }
        stack.extend_from_slice(ledger.parent_indices(ix));
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::issue::{build_unit, issue_unit};
    use crate::selection::{NoConflicts, TipSelectionAlgo};
    use dag_core::{Payload, Transaction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tx(sender: u32, output: u64) -> Payload {
        Payload::Transaction(Transaction {
            sender,
            consumed_output: output,
            amount: 1,
        })
    }

    #[test]
    fn issued_units_round_trip_validation() {
        let (ledger, _genesis) = TangleLedger::with_genesis(100, 0.0);
        let tracker = ConflictTracker::default();
        let puzzle = PoWPuzzle::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let unit = issue_unit(
            1,
            &ledger,
            tx(1, 7),
            &TipSelectionAlgo::default(),
            &puzzle,
            &NoConflicts,
            1.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(validate_unit(&ledger, &unit, &puzzle, &tracker), Validation::Accept);
    }

    #[test]
    fn tampered_payload_fails_signature() {
        let (ledger, _genesis) = TangleLedger::with_genesis(100, 0.0);
        let tracker = ConflictTracker::default();
        let puzzle = PoWPuzzle::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut unit = issue_unit(
            1,
            &ledger,
            tx(1, 7),
            &TipSelectionAlgo::default(),
            &puzzle,
            &NoConflicts,
            1.0,
            &mut rng,
        )
        .unwrap();
        unit.payload = tx(1, 8);
        assert_eq!(
            validate_unit(&ledger, &unit, &puzzle, &tracker),
            Validation::Reject(RejectReason::BadSignature)
        );
    }

    #[test]
    fn failing_nonce_is_rejected() {
        let (ledger, genesis) = TangleLedger::with_genesis(100, 0.0);
        let tracker = ConflictTracker::default();
        let puzzle = PoWPuzzle::new(8);
        // Search for a nonce whose hash misses the target, then sign it
        // properly so only the nonce check can fail.
        let payload = tx(1, 7);
        let mut nonce = 0u64;
        let unit = loop {
            let mut preimage =
                dag_core::canonical_preimage(1, &[genesis], &payload, 1, nonce, 1.0);
            preimage.set_nonce(nonce);
            let id = preimage.id();
            if !puzzle.check(id) {
                break dag_core::TangleUnit {
                    id,
                    issuer: 1,
                    parents: vec![genesis],
                    payload,
                    own_weight: 1,
                    nonce,
                    signature: sign_preimage(1, &preimage),
                    issued_at: 1.0,
                };
            }
            nonce += 1;
        };
        assert_eq!(
            validate_unit(&ledger, &unit, &puzzle, &tracker),
            Validation::Reject(RejectReason::BadNonce)
        );
    }

    #[test]
    fn unknown_parent_is_rejected() {
        let (ledger, _genesis) = TangleLedger::with_genesis(100, 0.0);
        let tracker = ConflictTracker::default();
        let puzzle = PoWPuzzle::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ghost = UnitId([5; 32]);
        let unit = build_unit(1, vec![ghost], tx(1, 9), &puzzle, 1.0, &mut rng);
        assert_eq!(
            validate_unit(&ledger, &unit, &puzzle, &tracker),
            Validation::Reject(RejectReason::UnknownParent(ghost))
        );
    }

    #[test]
    fn conflicting_parent_cones_are_rejected() {
        let (mut ledger, genesis) = TangleLedger::with_genesis(100, 0.0);
        let mut tracker = ConflictTracker::default();
        tracker.record(&ledger, genesis);
        let puzzle = PoWPuzzle::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);

        // Two branches spending the same output.
        let a = build_unit(1, vec![genesis], tx(1, 42), &puzzle, 1.0, &mut rng);
        let b = build_unit(2, vec![genesis], tx(2, 42), &puzzle, 1.0, &mut rng);
        let (a_id, b_id) = (a.id, b.id);
        ledger.insert_unit(a).unwrap();
        tracker.record(&ledger, a_id);
        ledger.insert_unit(b).unwrap();
        tracker.record(&ledger, b_id);

        let straddler = build_unit(3, vec![a_id, b_id], Payload::ZeroValue, &puzzle, 2.0, &mut rng);
        assert_eq!(
            validate_unit(&ledger, &straddler, &puzzle, &tracker),
            Validation::Reject(RejectReason::ConflictingParents)
        );

        // Approving a single branch stays legal.
        let clean = build_unit(3, vec![a_id], Payload::ZeroValue, &puzzle, 2.0, &mut rng);
        assert_eq!(validate_unit(&ledger, &clean, &puzzle, &tracker), Validation::Accept);
    }
}
