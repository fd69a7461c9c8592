use dag_core::{NodeId, Payload, TangleLedger, TangleUnit};
use rand::Rng;

use crate::issue::{build_unit, PoWPuzzle};

/// Privileged issuer of zero-value units that approve stale unconfirmed
/// tips, keeping cumulative weight growing when the arrival rate is low.
#[derive(Debug, Clone)]
pub struct Coordinator {
    pub enabled: bool,
    pub interval: f64,
    pub issuer: NodeId,
    last_tick: Option<f64>,
}

impl Coordinator {
    pub fn new(enabled: bool, interval: f64, issuer: NodeId) -> Self {
        assert!(!enabled || interval > 0.0, "interval must be positive");
        Self {
            enabled,
            interval,
            issuer,
            last_tick: None,
        }
    }

    pub fn disabled() -> Self {
        Self::new(false, 1.0, 0)
    }
}

/// Issues one zero-value unit when due. Parents are the two unconfirmed
/// tips with the oldest issue times, topped up with the newest tips when
/// fewer than two exist.
pub fn coordinator_tick(
    ledger: &TangleLedger,
    coordinator: &mut Coordinator,
    puzzle: &PoWPuzzle,
    now: f64,
    rng: &mut impl Rng,
) -> Option<TangleUnit> {
    if !coordinator.enabled || ledger.is_empty() {
        return None;
    }
    if let Some(last) = coordinator.last_tick {
        if now < last + coordinator.interval {
            return None;
        }
    }
    coordinator.last_tick = Some(now);

    let mut unconfirmed: Vec<u32> = Vec::new();
    let mut confirmed: Vec<u32> = Vec::new();
    for tip in ledger.tip_indices() {
        if ledger.cumulative_weight_at(tip) >= ledger.confirmation_threshold() {
            confirmed.push(tip);
        } else {
            unconfirmed.push(tip);
        }
    }
    let key = |ix: &u32| {
        let unit = ledger.unit_at(*ix);
        (dag_core::time_to_millis(unit.issued_at), unit.id)
    };
    unconfirmed.sort_by_key(key);
    confirmed.sort_by_key(key);
    confirmed.reverse();

    let parents: Vec<_> = unconfirmed
        .into_iter()
        .chain(confirmed)
        .take(2)
        .map(|ix| ledger.id_at(ix))
        .collect();
    debug_assert!(!parents.is_empty(), "non-empty ledger always has tips");
    Some(build_unit(
        coordinator.issuer,
        parents,
        Payload::ZeroValue,
        puzzle,
        now,
        rng,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disabled_coordinator_is_a_no_op() {
        let (ledger, _genesis) = TangleLedger::with_genesis(100, 0.0);
        let mut coordinator = Coordinator::disabled();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(coordinator_tick(&ledger, &mut coordinator, &PoWPuzzle::new(1), 10.0, &mut rng)
            .is_none());
    }

    #[test]
    fn tick_respects_the_interval() {
        let (mut ledger, _genesis) = TangleLedger::with_genesis(100, 0.0);
        let mut coordinator = Coordinator::new(true, 5.0, 9);
        let puzzle = PoWPuzzle::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let first = coordinator_tick(&ledger, &mut coordinator, &puzzle, 5.0, &mut rng).unwrap();
        ledger.insert_unit(first).unwrap();
        assert!(coordinator_tick(&ledger, &mut coordinator, &puzzle, 7.0, &mut rng).is_none());
        assert!(coordinator_tick(&ledger, &mut coordinator, &puzzle, 10.0, &mut rng).is_some());
    }

    #[test]
    fn stale_tip_gains_one_weight_per_tick() {
        // genesis <- T, lambda = 0 otherwise: after k ticks the stale unit's
        // cumulative weight is 1 + k.
        let (mut ledger, genesis) = TangleLedger::with_genesis(1_000, 0.0);
        let puzzle = PoWPuzzle::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stale = build_unit(1, vec![genesis], Payload::ZeroValue, &puzzle, 1.0, &mut rng);
        let stale_id = stale.id;
        ledger.insert_unit(stale).unwrap();

        let mut coordinator = Coordinator::new(true, 2.0, 9);
        for k in 1..=6u64 {
            let unit =
                coordinator_tick(&ledger, &mut coordinator, &puzzle, 2.0 * k as f64, &mut rng)
                    .unwrap();
            ledger.insert_unit(unit).unwrap();
            assert_eq!(ledger.cumulative_weight(stale_id).unwrap(), 1 + k);
        }
    }

    #[test]
    fn without_unconfirmed_tips_the_newest_tips_are_approved() {
        // Threshold 1 confirms everything on arrival, so the fallback path
        // picks the two newest tips.
        let (mut ledger, genesis) = TangleLedger::with_genesis(1, 0.0);
        let puzzle = PoWPuzzle::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut newest = Vec::new();
        for n in 0..3 {
            let u = build_unit(1, vec![genesis], Payload::ZeroValue, &puzzle, 1.0 + n as f64, &mut rng);
            newest.push((u.issued_at, u.id));
            ledger.insert_unit(u).unwrap();
        }
        let mut coordinator = Coordinator::new(true, 1.0, 9);
        let unit = coordinator_tick(&ledger, &mut coordinator, &puzzle, 10.0, &mut rng).unwrap();
        assert!(unit.payload.is_zero_value());
        newest.sort_by_key(|&(t, id)| (dag_core::time_to_millis(t), id));
        let expect: Vec<_> = newest.iter().rev().take(2).map(|&(_, id)| id).collect();
        let mut got = unit.parents.clone();
        got.sort();
        let mut want = expect.clone();
        want.sort();
        assert_eq!(got, want);
    }
}
