use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use crate::error::DagError;
use crate::id::UnitId;
use crate::unit::{Payload, TangleUnit, GENESIS_ISSUER};

/// Result of a successful insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertOutcome {
    pub id: UnitId,
    /// Ancestors (and possibly the unit itself) whose cumulative weight
    /// crossed the confirmation threshold during this insertion.
    pub newly_confirmed: Vec<UnitId>,
}

/// Append-only DAG ledger with tip tracking and incrementally maintained
/// cumulative weights.
///
/// Units are stored densely; insertion order is a topological order because
/// parents must exist at insertion time. Index-based accessors expose the
/// dense view for walk-heavy callers; all of them panic on out-of-range
/// indices, which cannot be obtained through the public API.
pub struct TangleLedger {
    units: Vec<TangleUnit>,
    index: HashMap<UnitId, u32>,
    parents_ix: Vec<Vec<u32>>,
    children_ix: Vec<Vec<u32>>,
    tips_ix: BTreeSet<u32>,
    cumulative: Vec<u64>,
    height: Vec<u32>,
    max_height: u32,
    genesis: Option<u32>,
    confirmation_threshold: u64,
    visit_stamp: Vec<u64>,
    stamp: u64,
}

impl TangleLedger {
    /// Empty ledger. The first inserted unit must be parentless (genesis).
    pub fn new(confirmation_threshold: u64) -> Self {
        assert!(confirmation_threshold >= 1, "threshold must be positive");
        Self {
            units: Vec::new(),
            index: HashMap::new(),
            parents_ix: Vec::new(),
            children_ix: Vec::new(),
            tips_ix: BTreeSet::new(),
            cumulative: Vec::new(),
            height: Vec::new(),
            max_height: 0,
            genesis: None,
            confirmation_threshold,
            visit_stamp: Vec::new(),
            stamp: 0,
        }
    }

    /// Ledger seeded with a standard zero-value genesis unit.
    pub fn with_genesis(confirmation_threshold: u64, issued_at: f64) -> (Self, UnitId) {
        let mut ledger = Self::new(confirmation_threshold);
        let preimage =
            crate::unit::canonical_preimage(GENESIS_ISSUER, &[], &Payload::ZeroValue, 1, 0, issued_at);
        let genesis = TangleUnit {
            id: preimage.id(),
            issuer: GENESIS_ISSUER,
            parents: Vec::new(),
            payload: Payload::ZeroValue,
            own_weight: 1,
            nonce: 0,
            signature: [0; 32],
            issued_at,
        };
        let id = genesis.id;
        ledger.insert_unit(genesis).expect("genesis insert");
        (ledger, id)
    }

    pub fn confirmation_threshold(&self) -> u64 {
        self.confirmation_threshold
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains(&self, id: UnitId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn unit(&self, id: UnitId) -> Option<&TangleUnit> {
        self.index.get(&id).map(|&ix| &self.units[ix as usize])
    }

    pub fn genesis_id(&self) -> Option<UnitId> {
        self.genesis.map(|ix| self.units[ix as usize].id)
    }

    /// Current tips in insertion order.
    pub fn tips(&self) -> Vec<UnitId> {
        self.tips_ix.iter().map(|&ix| self.units[ix as usize].id).collect()
    }

    pub fn tip_count(&self) -> usize {
        self.tips_ix.len()
    }

    pub fn children_of(&self, id: UnitId) -> Result<Vec<UnitId>, DagError> {
        let ix = self.require(id)?;
        Ok(self.children_ix[ix as usize]
            .iter()
            .map(|&c| self.units[c as usize].id)
            .collect())
    }

    /// Stores a unit. Parents must already be present; duplicate parent
    /// entries collapse to one link.
    pub fn insert_unit(&mut self, mut unit: TangleUnit) -> Result<InsertOutcome, DagError> {
        if self.index.contains_key(&unit.id) {
            return Err(DagError::DuplicateUnit(unit.id));
        }
        if unit.parents.is_empty() && !self.units.is_empty() {
            return Err(DagError::ParentlessUnit);
        }

        let mut parent_ix: Vec<u32> = Vec::with_capacity(unit.parents.len());
        let mut seen_parents: Vec<UnitId> = Vec::with_capacity(unit.parents.len());
        for &parent in &unit.parents {
            let ix = self
                .index
                .get(&parent)
                .copied()
                .ok_or(DagError::UnknownParent(parent))?;
            if !parent_ix.contains(&ix) {
                parent_ix.push(ix);
                seen_parents.push(parent);
            }
        }
        unit.parents = seen_parents;

        let ix = self.units.len() as u32;
        let own_weight = unit.own_weight.max(1);
        let height = parent_ix
            .iter()
            .map(|&p| self.height[p as usize] + 1)
            .max()
            .unwrap_or(0);
        self.max_height = self.max_height.max(height);

        for &p in &parent_ix {
            self.children_ix[p as usize].push(ix);
            self.tips_ix.remove(&p);
        }
        let id = unit.id;
        self.index.insert(id, ix);
        self.units.push(unit);
        self.parents_ix.push(parent_ix.clone());
        self.children_ix.push(Vec::new());
        self.cumulative.push(own_weight);
        self.height.push(height);
        self.visit_stamp.push(0);
        self.tips_ix.insert(ix);
        if self.genesis.is_none() {
            self.genesis = Some(ix);
        }

        let mut newly_confirmed = Vec::new();
        if own_weight >= self.confirmation_threshold {
            newly_confirmed.push(id);
        }

        // Every ancestor of the new unit gains its own weight.
        self.stamp += 1;
        let stamp = self.stamp;
        let mut stack = parent_ix;
        while let Some(a) = stack.pop() {
            let a = a as usize;
            if self.visit_stamp[a] == stamp {
                continue;
            }
            self.visit_stamp[a] = stamp;
            let before = self.cumulative[a];
            self.cumulative[a] = before + own_weight;
            if before < self.confirmation_threshold
                && self.cumulative[a] >= self.confirmation_threshold
            {
                newly_confirmed.push(self.units[a].id);
            }
            stack.extend_from_slice(&self.parents_ix[a]);
        }

        Ok(InsertOutcome { id, newly_confirmed })
    }

    /// Own weight plus the own weights of all direct and indirect approvers,
    /// each approver counted once.
    pub fn cumulative_weight(&self, target: UnitId) -> Result<u64, DagError> {
        let ix = self.require(target)?;
        Ok(self.cumulative[ix as usize])
    }

    /// True iff `to` is reachable from `from` via parent links, i.e. `from`
    /// approves `to` directly or indirectly. Reflexive.
    pub fn reachability(&self, from: UnitId, to: UnitId) -> Result<bool, DagError> {
        let from_ix = self.require(from)?;
        let to_ix = self.require(to)?;
        if from_ix == to_ix {
            return Ok(true);
        }
        // Parents always precede children, so the search can prune indices
        // below the target.
        if to_ix > from_ix {
            return Ok(false);
        }
        let mut visited = vec![false; self.units.len()];
        let mut stack = vec![from_ix];
        while let Some(u) = stack.pop() {
            if u == to_ix {
                return Ok(true);
            }
            for &p in &self.parents_ix[u as usize] {
                if p >= to_ix && !visited[p as usize] {
                    visited[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        Ok(false)
    }

    pub fn is_confirmed(&self, target: UnitId) -> Result<bool, DagError> {
        Ok(self.cumulative_weight(target)? >= self.confirmation_threshold)
    }

    /// Snapshot export, one unit per line:
    /// id, issuer, parents (semicolon-joined), payload kind, consumed output,
    /// own weight, issue time.
    pub fn export_snapshot(&self, out: &mut impl Write) -> io::Result<()> {
        for unit in &self.units {
            let parents = unit
                .parents
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(";");
            let (kind, output) = match &unit.payload {
                Payload::Transaction(tx) => ("tx", tx.consumed_output.to_string()),
                Payload::ZeroValue => ("zero", "-".to_string()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                unit.id, unit.issuer, parents, kind, output, unit.own_weight, unit.issued_at
            )?;
        }
        Ok(())
    }

    // Dense-index view -------------------------------------------------

    pub fn index_of(&self, id: UnitId) -> Option<u32> {
        self.index.get(&id).copied()
    }

    pub fn id_at(&self, ix: u32) -> UnitId {
        self.units[ix as usize].id
    }

    pub fn unit_at(&self, ix: u32) -> &TangleUnit {
        &self.units[ix as usize]
    }

    pub fn parent_indices(&self, ix: u32) -> &[u32] {
        &self.parents_ix[ix as usize]
    }

    pub fn child_indices(&self, ix: u32) -> &[u32] {
        &self.children_ix[ix as usize]
    }

    pub fn cumulative_weight_at(&self, ix: u32) -> u64 {
        self.cumulative[ix as usize]
    }

    /// Distance from genesis (genesis itself has height 0).
    pub fn height_at(&self, ix: u32) -> u32 {
        self.height[ix as usize]
    }

    pub fn max_height(&self) -> u32 {
        self.max_height
    }

    pub fn genesis_index(&self) -> Option<u32> {
        self.genesis
    }

    pub fn tip_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.tips_ix.iter().copied()
    }

    fn require(&self, id: UnitId) -> Result<u32, DagError> {
        self.index.get(&id).copied().ok_or(DagError::UnknownUnit(id))
    }
}
