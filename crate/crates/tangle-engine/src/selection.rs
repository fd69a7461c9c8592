use dag_core::{TangleLedger, UnitId};
use rand::Rng;

use crate::EngineError;

/// How parents are picked for a new unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionVariant {
    UniformRandom,
    WeightedMCMC,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipSelectionAlgo {
    pub variant: SelectionVariant,
    /// Greediness of the weighted walk; 0 degenerates to a uniform walk.
    pub mcmc_alpha: f64,
    /// Walkers start this many approval generations behind the tip frontier.
    pub walk_start_depth: u32,
    /// One walker per parent slot.
    pub walker_count: usize,
}

impl Default for TipSelectionAlgo {
    fn default() -> Self {
        Self {
            variant: SelectionVariant::WeightedMCMC,
            mcmc_alpha: 0.5,
            walk_start_depth: 20,
            walker_count: 2,
        }
    }
}

impl TipSelectionAlgo {
    pub fn uniform(walker_count: usize) -> Self {
        Self {
            variant: SelectionVariant::UniformRandom,
            mcmc_alpha: 0.0,
            walker_count,
            ..Self::default()
        }
    }
}

/// Veto on tips whose ancestry endorses the losing side of a double spend.
pub trait TipFilter {
    fn is_tainted(&self, ledger: &TangleLedger, tip_ix: u32) -> bool;
}

/// Filter for ledgers with no conflicting transactions.
pub struct NoConflicts;

impl TipFilter for NoConflicts {
    fn is_tainted(&self, _ledger: &TangleLedger, _tip_ix: u32) -> bool {
        false
    }
}

const TAINT_RETRIES: usize = 10;

/// Picks `walker_count` tips (duplicates collapse, so fewer may be returned).
///
/// The weighted walk starts `walk_start_depth` generations behind the tip
/// frontier (clamped to genesis) and steps child-ward, choosing child `c`
/// with probability proportional to `exp(alpha * cumulative_weight(c))`.
/// Walks ending on a tainted tip are retried a bounded number of times, then
/// selection falls back to uniform choice among clean tips, and finally to
/// the genesis unit when every tip is tainted.
pub fn select_tips<F: TipFilter>(
    ledger: &TangleLedger,
    algo: &TipSelectionAlgo,
    rng: &mut impl Rng,
    filter: &F,
) -> Result<Vec<UnitId>, EngineError> {
    if ledger.is_empty() {
        return Err(EngineError::NoValidTips);
    }
    let clean_tips: Vec<u32> = ledger
        .tip_indices()
        .filter(|&t| !filter.is_tainted(ledger, t))
        .collect();

    let mut picked: Vec<u32> = Vec::with_capacity(algo.walker_count);
    match algo.variant {
        SelectionVariant::UniformRandom => {
            for _ in 0..algo.walker_count.max(1) {
                match pick_clean_or_genesis(ledger, &clean_tips, rng) {
                    Some(t) => push_dedup(&mut picked, t),
                    None => return Err(EngineError::NoValidTips),
                }
            }
        }
        SelectionVariant::WeightedMCMC => {
            let starts = walk_start_set(ledger, algo.walk_start_depth);
            for _ in 0..algo.walker_count.max(1) {
                let mut chosen = None;
                for _ in 0..=TAINT_RETRIES {
                    let start = starts[rng.gen_range(0..starts.len())];
                    let tip = weighted_walk(ledger, start, algo.mcmc_alpha, rng);
                    if !filter.is_tainted(ledger, tip) {
                        chosen = Some(tip);
                        break;
                    }
                }
                let tip = match chosen.or_else(|| pick_clean_or_genesis(ledger, &clean_tips, rng)) {
                    Some(t) => t,
                    None => return Err(EngineError::NoValidTips),
                };
                push_dedup(&mut picked, tip);
            }
        }
    }
    Ok(picked.into_iter().map(|ix| ledger.id_at(ix)).collect())
}

fn push_dedup(picked: &mut Vec<u32>, tip: u32) {
    if !picked.contains(&tip) {
        picked.push(tip);
    }
}

fn pick_clean_or_genesis(
    ledger: &TangleLedger,
    clean_tips: &[u32],
    rng: &mut impl Rng,
) -> Option<u32> {
    if clean_tips.is_empty() {
        ledger.genesis_index()
    } else {
        Some(clean_tips[rng.gen_range(0..clean_tips.len())])
    }
}

/// Units exactly `depth` BFS generations behind the tip frontier, or the
/// genesis when the DAG is shallower than that.
fn walk_start_set(ledger: &TangleLedger, depth: u32) -> Vec<u32> {
    let n = ledger.len();
    if depth == 0 {
        return ledger.tip_indices().collect();
    }
    let mut dist = vec![u32::MAX; n];
    let mut frontier: Vec<u32> = ledger.tip_indices().collect();
    for &t in &frontier {
        dist[t as usize] = 0;
    }
    let mut layer = 0;
    while layer < depth && !frontier.is_empty() {
        layer += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for &p in ledger.parent_indices(u) {
                if dist[p as usize] == u32::MAX {
                    dist[p as usize] = layer;
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    if layer == depth && !frontier.is_empty() {
        frontier
    } else {
        vec![ledger.genesis_index().expect("non-empty ledger")]
    }
}

fn weighted_walk(ledger: &TangleLedger, start: u32, alpha: f64, rng: &mut impl Rng) -> u32 {
    let mut at = start;
    loop {
        let children = ledger.child_indices(at);
        match children.len() {
            0 => return at,
            1 => at = children[0],
            _ => {
                let max_w = children
                    .iter()
                    .map(|&c| ledger.cumulative_weight_at(c))
                    .max()
                    .unwrap();
                let weights: Vec<f64> = children
                    .iter()
                    .map(|&c| {
                        (alpha * (ledger.cumulative_weight_at(c) as f64 - max_w as f64)).exp()
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut draw = rng.gen::<f64>() * total;
                let mut next = children[children.len() - 1];
                for (i, w) in weights.iter().enumerate() {
                    draw -= w;
                    if draw <= 0.0 {
                        next = children[i];
                        break;
                    }
                }
                at = next;
            }
        }
    }
}

/// Parent selection for a lazy node: uniform picks among units more than
/// `lazy_depth` generations behind the frontier, falling back to genesis.
pub fn select_lazy_parents(
    ledger: &TangleLedger,
    lazy_depth: u32,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<UnitId> {
    let cutoff = ledger.max_height().saturating_sub(lazy_depth);
    let candidates: Vec<u32> = (0..ledger.len() as u32)
        .filter(|&ix| ledger.height_at(ix) < cutoff)
        .collect();
    let mut picked: Vec<u32> = Vec::with_capacity(count);
    for _ in 0..count.max(1) {
        let ix = if candidates.is_empty() {
            ledger.genesis_index().expect("non-empty ledger")
        } else {
            candidates[rng.gen_range(0..candidates.len())]
        };
        push_dedup(&mut picked, ix);
    }
    picked.into_iter().map(|ix| ledger.id_at(ix)).collect()
}
