use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};

use dag_core::{TangleLedger, UnitId};

use crate::selection::TipFilter;
use crate::EngineError;

/// Per-ledger double-spend bookkeeping.
///
/// The first observed spender of an output is treated as the locally
/// accepted one; later spenders are disallowed and every unit whose ancestry
/// contains a disallowed unit is tainted. `record` must be called once per
/// unit, in insertion order, right after `insert_unit`.
#[derive(Default)]
pub struct ConflictTracker {
    first_spend: HashMap<u64, UnitId>,
    disallowed: HashSet<UnitId>,
    conflict_sets: HashMap<u64, Vec<UnitId>>,
    tainted: Vec<bool>,
}

impl ConflictTracker {
    pub fn record(&mut self, ledger: &TangleLedger, id: UnitId) {
        let ix = ledger.index_of(id).expect("recorded unit must be stored");
        debug_assert_eq!(ix as usize, self.tainted.len(), "record in insertion order");
        let mut taint = ledger
            .parent_indices(ix)
            .iter()
            .any(|&p| self.tainted[p as usize]);
        if let Some(output) = ledger.unit_at(ix).payload.consumed_output() {
            match self.first_spend.entry(output) {
                Entry::Occupied(first) => {
                    if *first.get() != id {
                        let set = self.conflict_sets.entry(output).or_insert_with(|| {
                            vec![*first.get()]
                        });
                        set.push(id);
                        self.disallowed.insert(id);
                        taint = true;
                    }
                }
                Entry::Vacant(slot) => {
                    slot.insert(id);
                }
            }
        }
        self.tainted.push(taint);
    }

    pub fn conflict_exists(&self) -> bool {
        !self.disallowed.is_empty()
    }

    pub fn is_disallowed(&self, id: UnitId) -> bool {
        self.disallowed.contains(&id)
    }

    /// All spenders observed for `output`, once more than one exists.
    pub fn conflict_set(&self, output: u64) -> Option<&[UnitId]> {
        self.conflict_sets.get(&output).map(|v| v.as_slice())
    }
}

impl TipFilter for ConflictTracker {
    fn is_tainted(&self, _ledger: &TangleLedger, tip_ix: u32) -> bool {
        self.tainted.get(tip_ix as usize).copied().unwrap_or(false)
    }
}

/// Picks the winner of a set of mutually conflicting units: largest
/// cumulative weight, ties broken by smaller id byte order.
pub fn resolve_conflicts(
    ledger: &TangleLedger,
    conflict_set: &[UnitId],
) -> Result<UnitId, EngineError> {
    if conflict_set.is_empty() {
        return Err(EngineError::EmptyConflictSet);
    }
    let mut winner: Option<(u64, UnitId)> = None;
    for &id in conflict_set {
        let weight = ledger.cumulative_weight(id)?;
        winner = Some(match winner {
            None => (weight, id),
            Some((best_w, best_id)) => {
                if weight > best_w || (weight == best_w && id < best_id) {
                    (weight, id)
                } else {
                    (best_w, best_id)
                }
            }
        });
    }
    Ok(winner.expect("non-empty set").1)
}
