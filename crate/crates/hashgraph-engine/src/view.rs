use std::collections::HashMap;
use std::io::{self, Write};

use dag_core::{NodeId, Transaction};

use crate::event::{Event, EventId, Fame};
use crate::supermajority;

/// One node's knowledge of the event graph, with incrementally computed
/// consensus state. Events are stored in insertion order, which is a
/// topological order because every insertion path (own creation, ancestor-
/// closed sync) guarantees parents first.
pub struct HashgraphView {
    owner: NodeId,
    population: u32,
    pub(crate) events: Vec<Event>,
    index: HashMap<EventId, u32>,
    pub(crate) self_parent_ix: Vec<Option<u32>>,
    pub(crate) other_parent_ix: Vec<Option<u32>>,
    /// Per event: ancestor bitset over indices `0..=ix` (self included).
    ancestors: Vec<Vec<u64>>,
    /// Per event and creator: the maximal events by that creator the event
    /// sees. A single entry for honest creators, one per chain under forks.
    max_seen: Vec<Vec<Vec<u32>>>,
    last_inserted: Vec<Option<u32>>,

    // Own-chain state for event creation.
    chain_heads: Vec<u32>,
    next_chain: usize,
    fork_mode: bool,
    created_count: u64,

    // Consensus state.
    pub(crate) rounds_cursor: usize,
    pub(crate) witnesses_by_round: Vec<Vec<u32>>,
    pub(crate) undecided: Vec<u32>,
    pub(crate) votes: HashMap<(u32, u32), bool>,
    pub(crate) unordered: Vec<u32>,
    pub(crate) next_order_index: u64,
    pub(crate) next_receive_round: u32,
    pub(crate) received_round: Vec<Option<u32>>,
    pub(crate) max_round: u32,
    pub(crate) stalled_elections: usize,
}

fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d |= *s;
    }
}

impl HashgraphView {
    /// Fresh view holding only the owner's genesis event.
    pub fn new(owner: NodeId, population: u32) -> Self {
        assert!(population >= 1 && owner < population);
        let mut view = Self {
            owner,
            population,
            events: Vec::new(),
            index: HashMap::new(),
            self_parent_ix: Vec::new(),
            other_parent_ix: Vec::new(),
            ancestors: Vec::new(),
            max_seen: Vec::new(),
            last_inserted: vec![None; population as usize],
            chain_heads: Vec::new(),
            next_chain: 0,
            fork_mode: false,
            created_count: 0,
            rounds_cursor: 0,
            witnesses_by_round: vec![Vec::new(), Vec::new()],
            undecided: Vec::new(),
            votes: HashMap::new(),
            unordered: Vec::new(),
            next_order_index: 0,
            next_receive_round: 1,
            received_round: Vec::new(),
            max_round: 1,
            stalled_elections: 0,
        };
        let genesis = Event::build(owner, None, None, vec![], 0.0);
        let ix = view.insert_event(genesis);
        view.chain_heads.push(ix);
        view
    }

    /// The creator will maintain two self-parent chains from now on,
    /// alternating between them on each created event.
    pub fn enable_forking(&mut self) {
        self.fork_mode = true;
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn population(&self) -> u32 {
        self.population
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, id: EventId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn event(&self, id: EventId) -> Option<&Event> {
        self.index.get(&id).map(|&ix| &self.events[ix as usize])
    }

    pub fn event_at(&self, ix: u32) -> &Event {
        &self.events[ix as usize]
    }

    pub fn index_of(&self, id: EventId) -> Option<u32> {
        self.index.get(&id).copied()
    }

    /// Latest event by `creator` known to this view (insertion order).
    pub fn latest_event_of(&self, creator: NodeId) -> Option<EventId> {
        self.last_inserted[creator as usize].map(|ix| self.events[ix as usize].id)
    }

    /// Genesis event for `creator`, inserting it if absent. Used to seed
    /// hand-built graphs; gossip carries genesis events around by itself.
    pub fn add_genesis(&mut self, creator: NodeId) -> EventId {
        let ev = Event::build(creator, None, None, vec![], 0.0);
        let id = ev.id;
        if !self.contains(id) {
            self.insert_event(ev);
        }
        id
    }

    /// Builds, signs and inserts an event on behalf of any creator; parents
    /// must be present. Intended for constructing explicit test graphs.
    pub fn insert_external(
        &mut self,
        creator: NodeId,
        self_parent: Option<EventId>,
        other_parent: Option<EventId>,
        claimed_time: f64,
        payload: Vec<Transaction>,
    ) -> EventId {
        let ev = Event::build(creator, self_parent, other_parent, payload, claimed_time);
        let id = ev.id;
        self.insert_event(ev);
        id
    }

    /// Records one event created by the owner, linking the current chain
    /// head to `other_parent`.
    pub fn create_event(
        &mut self,
        other_parent: Option<EventId>,
        now: f64,
        payload: Vec<Transaction>,
    ) -> EventId {
        let sp_ix = self.pick_self_parent();
        let sp_id = self.events[sp_ix as usize].id;
        let ev = Event::build(self.owner, Some(sp_id), other_parent, payload, now);
        let id = ev.id;
        let ix = self.insert_event(ev);
        self.created_count += 1;
        if let Some(pos) = self.chain_heads.iter().position(|&h| h == sp_ix) {
            self.chain_heads[pos] = ix;
            if self.chain_heads.len() == 2 {
                self.next_chain = (pos + 1) % 2;
            }
        } else {
            // Second chain started from the own genesis.
            self.chain_heads.push(ix);
            self.next_chain = 0;
        }
        id
    }

    fn pick_self_parent(&self) -> u32 {
        if self.fork_mode {
            if self.chain_heads.len() == 1 && self.created_count >= 1 {
                return 0; // own genesis: fork point
            }
            if self.chain_heads.len() == 2 {
                return self.chain_heads[self.next_chain];
            }
        }
        *self.chain_heads.last().expect("own chain present")
    }

    pub(crate) fn insert_foreign(&mut self, ev: Event) -> u32 {
        debug_assert_ne!(ev.creator, self.owner, "own events never arrive by sync");
        self.insert_event(ev)
    }

    fn insert_event(&mut self, ev: Event) -> u32 {
        assert!(!self.index.contains_key(&ev.id), "duplicate event");
        assert!(ev.creator < self.population, "creator out of range");
        let sp_ix = ev.self_parent.map(|p| self.index[&p]);
        let op_ix = ev.other_parent.map(|p| self.index[&p]);
        if let (Some(sp), Some(ev_sp)) = (sp_ix, ev.self_parent) {
            debug_assert_eq!(self.events[sp as usize].creator, ev.creator);
            let _ = ev_sp;
        }

        let ix = self.events.len() as u32;
        let words = ix as usize / 64 + 1;
        let mut bits = vec![0u64; words];
        if let Some(p) = sp_ix {
            or_into(&mut bits, &self.ancestors[p as usize]);
        }
        if let Some(p) = op_ix {
            or_into(&mut bits, &self.ancestors[p as usize]);
        }
        bits[ix as usize / 64] |= 1 << (ix % 64);

        let n = self.population as usize;
        let mut max_seen: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (c, slot) in max_seen.iter_mut().enumerate() {
            if c == ev.creator as usize {
                slot.push(ix);
                continue;
            }
            let mut cands: Vec<u32> = Vec::new();
            for p in [sp_ix, op_ix].into_iter().flatten() {
                for &m in &self.max_seen[p as usize][c] {
                    if !cands.contains(&m) {
                        cands.push(m);
                    }
                }
            }
            slot.extend(
                cands
                    .iter()
                    .filter(|&&m| !cands.iter().any(|&o| o != m && self.sees_ix(o, m)))
                    .copied(),
            );
        }

        self.index.insert(ev.id, ix);
        self.last_inserted[ev.creator as usize] = Some(ix);
        self.events.push(ev);
        self.self_parent_ix.push(sp_ix);
        self.other_parent_ix.push(op_ix);
        self.ancestors.push(bits);
        self.max_seen.push(max_seen);
        self.received_round.push(None);
        self.unordered.push(ix);
        ix
    }

    /// Ancestry check: does `a` know `b` (directly or transitively)?
    /// Reflexive.
    pub fn sees(&self, a: EventId, b: EventId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(a), Some(b)) => self.sees_ix(a, b),
            _ => false,
        }
    }

    pub(crate) fn sees_ix(&self, a: u32, b: u32) -> bool {
        if b > a {
            return false;
        }
        self.ancestors[a as usize][b as usize / 64] >> (b % 64) & 1 == 1
    }

    /// Seeing through events of more than two thirds of the creators.
    pub fn strongly_sees(&self, a: EventId, b: EventId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(a), Some(b)) => self.strongly_sees_ix(a, b),
            _ => false,
        }
    }

    pub(crate) fn strongly_sees_ix(&self, a: u32, b: u32) -> bool {
        let mut creators = 0;
        for c in 0..self.population as usize {
            if self.max_seen[a as usize][c]
                .iter()
                .any(|&m| self.sees_ix(m, b))
            {
                creators += 1;
            }
        }
        supermajority(creators, self.population)
    }

    pub fn round_of(&self, id: EventId) -> Option<u32> {
        self.index_of(id).map(|ix| self.events[ix as usize].round)
    }

    pub fn is_witness(&self, id: EventId) -> Option<bool> {
        self.index_of(id).map(|ix| self.events[ix as usize].is_witness)
    }

    pub fn fame_of(&self, id: EventId) -> Option<Fame> {
        self.index_of(id).map(|ix| self.events[ix as usize].fame)
    }

    pub fn received_round_of(&self, id: EventId) -> Option<u32> {
        self.index_of(id).and_then(|ix| self.received_round[ix as usize])
    }

    pub fn max_round(&self) -> u32 {
        self.max_round
    }

    /// First round whose events are not yet finally ordered.
    pub fn next_receive_round(&self) -> u32 {
        self.next_receive_round
    }

    /// Elections still open although ten or more rounds have passed; a
    /// diagnostic, since coin rounds are not implemented.
    pub fn stalled_elections(&self) -> usize {
        self.stalled_elections
    }

    pub fn witnesses_of_round(&self, round: u32) -> Vec<EventId> {
        self.witnesses_by_round
            .get(round as usize)
            .map(|w| w.iter().map(|&ix| self.events[ix as usize].id).collect())
            .unwrap_or_default()
    }

    /// Confirmed events in their final total order.
    pub fn ordered_events(&self) -> Vec<&Event> {
        let mut out: Vec<&Event> = self
            .events
            .iter()
            .filter(|e| e.order_index.is_some())
            .collect();
        out.sort_by_key(|e| e.order_index);
        out
    }

    /// One event per line: id, creator, parents, claimed time, round,
    /// witness flag, fame letter, order index.
    pub fn export_events(&self, out: &mut impl Write) -> io::Result<()> {
        for ev in &self.events {
            let sp = ev
                .self_parent
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into());
            let op = ev
                .other_parent
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into());
            let order = ev
                .order_index
                .map(|o| o.to_string())
                .unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{},{},{},{},{:.3},{},{},{},{}",
                ev.id,
                ev.creator,
                sp,
                op,
                ev.claimed_time,
                ev.round,
                u8::from(ev.is_witness),
                ev.fame.letter(),
                order
            )?;
        }
        Ok(())
    }
}
