//! Hand-computed event graphs and brute-force oracles for rounds, strongly
//! seeing, fame, and ordering.

use std::collections::{HashMap, HashSet};

use hashgraph_engine::{
    assign_rounds, elect_fame, gossip_sync, order_events, EventId, Fame, HashgraphView,
    WireEventSize,
};

/// Four genesis events plus the spiral used across these tests:
///
/// ```text
/// T  (creator 3, self gD)              t=0.5   the ordering target
/// a1 (creator 0, self gA, other T)     t=1.0
/// b1 (creator 1, self gB, other a1)    t=2.0
/// c1 (creator 2, self gC, other b1)    t=9.0
/// a2, b2, c2, a3, b3, c3, ...          t=10..  spiral over creators 0,1,2
/// ```
struct MedianGraph {
    view: HashgraphView,
    genesis: Vec<EventId>,
    target: EventId,
    a1: EventId,
    b1: EventId,
    c1: EventId,
    a2: EventId,
    b2: EventId,
    c2: EventId,
}

fn median_graph(spiral_rounds: usize) -> MedianGraph {
    assert!(spiral_rounds >= 1);
    let mut view = HashgraphView::new(0, 4);
    let genesis: Vec<EventId> = (0..4).map(|c| view.add_genesis(c)).collect();
    let target = view.insert_external(3, Some(genesis[3]), None, 0.5, vec![]);
    let a1 = view.insert_external(0, Some(genesis[0]), Some(target), 1.0, vec![]);
    let b1 = view.insert_external(1, Some(genesis[1]), Some(a1), 2.0, vec![]);
    let c1 = view.insert_external(2, Some(genesis[2]), Some(b1), 9.0, vec![]);

    let mut last = [a1, b1, c1];
    let mut prev = c1;
    let mut time = 10.0;
    let mut firsts = Vec::new();
    for _ in 0..spiral_rounds {
        for creator in 0..3u32 {
            let e = view.insert_external(
                creator,
                Some(last[creator as usize]),
                Some(prev),
                time,
                vec![],
            );
            last[creator as usize] = e;
            prev = e;
            time += 1.0;
            firsts.push(e);
        }
    }
    MedianGraph {
        view,
        genesis,
        target,
        a1,
        b1,
        c1,
        a2: firsts[0],
        b2: firsts[1],
        c2: firsts[2],
    }
}

#[test]
fn genesis_events_are_round_one_witnesses() {
    let mut g = median_graph(1);
    assign_rounds(&mut g.view);
    for id in &g.genesis {
        assert_eq!(g.view.round_of(*id), Some(1));
        assert_eq!(g.view.is_witness(*id), Some(true));
    }
    // The creator's second event in the same round is not a witness.
    assert_eq!(g.view.round_of(g.target), Some(1));
    assert_eq!(g.view.is_witness(g.target), Some(false));
}

#[test]
fn first_event_strongly_seeing_three_witnesses_reaches_round_two() {
    let mut g = median_graph(2);
    assign_rounds(&mut g.view);
    // The pre-spiral events cannot strongly see three round-1 witnesses.
    for id in [g.a1, g.b1, g.c1] {
        assert_eq!(g.view.round_of(id), Some(1));
    }
    // Each creator's first spiral event strongly sees witnesses by three of
    // the four creators and advances.
    for id in [g.a2, g.b2, g.c2] {
        assert_eq!(g.view.round_of(id), Some(2), "{id:?}");
        assert_eq!(g.view.is_witness(id), Some(true));
    }
    let seen: Vec<bool> = g
        .genesis
        .iter()
        .map(|&w| g.view.strongly_sees(g.a2, w))
        .collect();
    assert_eq!(seen.iter().filter(|&&s| s).count(), 3);
}

/// Independent oracle: reachability by naive DFS over parent ids, strongly
/// seeing by enumerating intermediate events per creator.
fn sees_naive(view: &HashgraphView, from: EventId, to: EventId) -> bool {
    let mut stack = vec![from];
    let mut visited = HashSet::new();
    while let Some(id) = stack.pop() {
        if id == to {
            return true;
        }
        if !visited.insert(id) {
            continue;
        }
        let ev = view.event(id).unwrap();
        stack.extend(ev.self_parent);
        stack.extend(ev.other_parent);
    }
    false
}

fn strongly_sees_naive(view: &HashgraphView, from: EventId, to: EventId) -> bool {
    let mut creators = HashSet::new();
    for ix in 0..view.len() as u32 {
        let mid = view.event_at(ix).id;
        if sees_naive(view, from, mid) && sees_naive(view, mid, to) {
            creators.insert(view.event_at(ix).creator);
        }
    }
    3 * creators.len() as u32 > 2 * view.population()
}

#[test]
fn strongly_sees_matches_brute_force_enumeration() {
    let g = median_graph(4);
    let ids: Vec<EventId> = (0..g.view.len() as u32).map(|ix| g.view.event_at(ix).id).collect();
    assert!(ids.len() <= 60);
    for &a in &ids {
        for &b in &ids {
            assert_eq!(
                g.view.strongly_sees(a, b),
                strongly_sees_naive(&g.view, a, b),
                "{a:?} -> {b:?}"
            );
        }
    }
}

#[test]
fn well_connected_witnesses_become_famous() {
    let mut g = median_graph(5);
    elect_fame(&mut g.view);
    for id in &g.genesis {
        assert_eq!(g.view.fame_of(*id), Some(Fame::Famous), "{id:?}");
    }
    for id in [g.a2, g.b2, g.c2] {
        assert_eq!(g.view.fame_of(id), Some(Fame::Famous));
    }
    assert_eq!(g.view.stalled_elections(), 0);
}

#[test]
fn unseen_witness_is_decided_not_famous() {
    // Creator 3 owns a round-1 witness that nobody ever references: every
    // round-2 witness votes no, and the votes are collected in round 3.
    let mut view = HashgraphView::new(0, 4);
    let geneses: Vec<EventId> = (0..4).map(|c| view.add_genesis(c)).collect();
    let isolated = geneses[3];
    let mut last = [geneses[0], geneses[1], geneses[2]];
    let mut prev = geneses[0];
    let mut time = 1.0;
    for _ in 0..8 {
        for creator in 0..3u32 {
            let e = view.insert_external(
                creator,
                Some(last[creator as usize]),
                Some(prev),
                time,
                vec![],
            );
            last[creator as usize] = e;
            prev = e;
            time += 1.0;
        }
    }
    elect_fame(&mut view);
    assert_eq!(view.fame_of(isolated), Some(Fame::NotFamous));
    // The witnesses the gossiping trio does see still get decided famous.
    for id in &geneses[..3] {
        assert_eq!(view.fame_of(*id), Some(Fame::Famous));
    }
}

#[test]
fn consensus_time_is_the_median_of_first_seeing_times() {
    let mut g = median_graph(5);
    order_events(&mut g.view);

    // Three round-2 witnesses exist (creator 3 went silent), all famous,
    // and all of them see the target through a1/b1/c1.
    let round2 = g.view.witnesses_of_round(2);
    assert_eq!(round2.len(), 3);
    for w in &round2 {
        assert_eq!(g.view.fame_of(*w), Some(Fame::Famous));
        assert!(g.view.sees(*w, g.target));
    }

    let target = g.view.event(g.target).unwrap();
    assert_eq!(g.view.received_round_of(g.target), Some(2));
    // First-seeing events on the witnesses' self-parent chains carry claimed
    // times 1.0, 2.0 and 9.0; the median is 2.0.
    assert_eq!(target.consensus_time, Some(2.0));
    assert!(target.order_index.is_some());
}

#[test]
fn single_node_population_confirms_with_own_timestamps() {
    let mut view = HashgraphView::new(0, 1);
    let mut created = Vec::new();
    for k in 1..=5u32 {
        created.push(view.create_event(None, k as f64, vec![]));
    }
    order_events(&mut view);
    // Every witness with two later rounds available is famous immediately.
    for r in 1..=view.max_round().saturating_sub(2) {
        for w in view.witnesses_of_round(r) {
            assert_eq!(view.fame_of(w), Some(Fame::Famous));
        }
    }
    let first = view.event(created[0]).unwrap();
    assert_eq!(first.consensus_time, Some(1.0));
    let ordered = view.ordered_events();
    assert!(ordered.len() >= 3);
    for pair in ordered.windows(2) {
        assert!(pair[0].claimed_time <= pair[1].claimed_time);
    }
}

#[test]
fn round_robin_syncs_disseminate_the_first_event() {
    let mut views: Vec<HashgraphView> = (0..4).map(|i| HashgraphView::new(i, 4)).collect();
    let wire = WireEventSize::default();
    let genesis0 = views[0].event_at(0).id;
    for hop in 0..3usize {
        let (sender, receiver) = views.split_at_mut(hop + 1);
        let sender = &sender[hop];
        let len = sender.len();
        gossip_sync(sender, &mut receiver[0], len, 1.0 + hop as f64, vec![], &wire);
    }
    for view in &views {
        assert!(view.contains(genesis0));
    }
}

#[test]
fn byte_budget_and_idempotent_merge() {
    let mut a = HashgraphView::new(0, 3);
    let mut b = HashgraphView::new(1, 3);
    let mut c = HashgraphView::new(2, 3);
    let wire = WireEventSize::default();
    assert_eq!(wire.per_event_bytes(), 168);

    // B announces to A: A now holds exactly three events.
    let b_len = b.len();
    gossip_sync(&b, &mut a, b_len, 1.0, vec![], &wire);
    assert_eq!(a.len(), 3);

    // A announces all three to C.
    let a_len = a.len();
    let outcome = gossip_sync(&a, &mut c, a_len, 2.0, vec![], &wire);
    assert_eq!(outcome.delta_events, 3);
    assert_eq!(outcome.bytes_transferred, 3 * (4 + 64 + 100));

    // Repeating the announcement transfers nothing but still records an
    // event linking the latest heads.
    let before = c.len();
    let again = gossip_sync(&a, &mut c, a_len, 3.0, vec![], &wire);
    assert_eq!(again.delta_events, 0);
    assert_eq!(again.bytes_transferred, 0);
    assert_eq!(c.len(), before + 1);
    let new = c.event(again.new_event).unwrap();
    assert_eq!(new.creator, 2);
    assert!(new.self_parent.is_some() && new.other_parent.is_some());
}

/// Deterministic pseudo-random gossip among honest nodes; returns the final
/// views after running consensus on each.
fn honest_gossip(rounds: usize, seed: u64) -> Vec<HashgraphView> {
    let mut views: Vec<HashgraphView> = (0..4).map(|i| HashgraphView::new(i, 4)).collect();
    let wire = WireEventSize::default();
    let mut state = seed | 1;
    let mut time = 0.0;
    for _ in 0..rounds {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let sender = (state % 4) as usize;
        let receiver = (sender + 1 + (state >> 8) as usize % 3) % 4;
        time += 0.25;
        let sender_len = views[sender].len();
        let (a, b) = if sender < receiver {
            let (left, right) = views.split_at_mut(receiver);
            (&left[sender], &mut right[0])
        } else {
            let (left, right) = views.split_at_mut(sender);
            (&right[0], &mut left[receiver])
        };
        gossip_sync(a, b, sender_len, time, vec![], &wire);
        let receiver_view = &mut views[receiver];
        order_events(receiver_view);
    }
    for view in views.iter_mut() {
        order_events(view);
    }
    views
}

#[test]
fn views_stay_ancestor_closed_and_only_grow() {
    let views = honest_gossip(120, 0xfeed);
    for view in &views {
        for ix in 0..view.len() as u32 {
            let ev = view.event_at(ix);
            for parent in [ev.self_parent, ev.other_parent].into_iter().flatten() {
                assert!(view.contains(parent), "missing parent in view");
            }
        }
    }
}

#[test]
fn honest_views_agree_on_commonly_decided_order() {
    let views = honest_gossip(160, 0xabcdef);
    let orders: Vec<HashMap<EventId, u64>> = views
        .iter()
        .map(|v| {
            v.ordered_events()
                .iter()
                .map(|e| (e.id, e.order_index.unwrap()))
                .collect()
        })
        .collect();
    let mut decided_somewhere = 0;
    for i in 0..orders.len() {
        for j in i + 1..orders.len() {
            let common: Vec<EventId> = orders[i]
                .keys()
                .filter(|id| orders[j].contains_key(*id))
                .copied()
                .collect();
            decided_somewhere += common.len();
            for a in 0..common.len() {
                for b in a + 1..common.len() {
                    let (x, y) = (common[a], common[b]);
                    let lhs = orders[i][&x] < orders[i][&y];
                    let rhs = orders[j][&x] < orders[j][&y];
                    assert_eq!(lhs, rhs, "views {i} and {j} disagree on {x:?} vs {y:?}");
                }
            }
            // Consensus timestamps agree too.
            for id in &common {
                let ti = views[i].event(*id).unwrap().consensus_time;
                let tj = views[j].event(*id).unwrap().consensus_time;
                assert_eq!(ti, tj);
            }
        }
    }
    assert!(decided_somewhere > 0, "gossip ran long enough to decide events");
}

#[test]
fn dense_gossip_confirms_within_six_rounds() {
    let views = honest_gossip(200, 0x5eed);
    let view = &views[0];
    let frontier = view.next_receive_round();
    assert!(frontier > 3, "consensus advanced");
    let mut checked = 0;
    for ix in 0..view.len() as u32 {
        let ev = view.event_at(ix);
        if ev.round + 2 <= frontier.saturating_sub(1) {
            let received = view
                .received_round_of(ev.id)
                .unwrap_or_else(|| panic!("event in settled rounds must be ordered"));
            assert!(received - ev.round <= 6, "late confirmation: {received} vs {}", ev.round);
            checked += 1;
        }
    }
    assert!(checked > 10);
}
