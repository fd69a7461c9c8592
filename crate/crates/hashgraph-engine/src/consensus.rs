use crate::event::Fame;
use crate::supermajority;
use crate::view::HashgraphView;

/// Assigns rounds and witness flags to every event that does not have them
/// yet. Incremental and idempotent: an event's round depends only on its
/// ancestry, which is complete at insertion time, so values never change.
pub fn assign_rounds(view: &mut HashgraphView) {
    while view.rounds_cursor < view.events.len() {
        let ix = view.rounds_cursor as u32;
        view.rounds_cursor += 1;

        let sp = view.self_parent_ix[ix as usize];
        let op = view.other_parent_ix[ix as usize];
        let (round, witness) = match (sp, op) {
            (None, None) => (1, true),
            _ => {
                let parent_round = sp
                    .into_iter()
                    .chain(op)
                    .map(|p| view.events[p as usize].round)
                    .max()
                    .expect("at least one parent");
                let advanced = round_advances(view, ix, parent_round);
                let round = if advanced { parent_round + 1 } else { parent_round };
                let witness = match sp {
                    None => true,
                    Some(p) => round > view.events[p as usize].round,
                };
                (round, witness)
            }
        };

        let ev = &mut view.events[ix as usize];
        ev.round = round;
        ev.is_witness = witness;
        if witness {
            while view.witnesses_by_round.len() <= round as usize {
                view.witnesses_by_round.push(Vec::new());
            }
            view.witnesses_by_round[round as usize].push(ix);
            view.undecided.push(ix);
        }
        view.max_round = view.max_round.max(round);
    }
}

/// True when the event strongly sees round-`r` witnesses of more than two
/// thirds of the creators.
fn round_advances(view: &HashgraphView, ix: u32, parent_round: u32) -> bool {
    let Some(witnesses) = view.witnesses_by_round.get(parent_round as usize) else {
        return false;
    };
    let mut seen_creators: Vec<bool> = vec![false; view.population() as usize];
    for &w in witnesses {
        let creator = view.events[w as usize].creator as usize;
        if !seen_creators[creator] && view.strongly_sees_ix(ix, w) {
            seen_creators[creator] = true;
        }
    }
    let count = seen_creators.iter().filter(|&&s| s).count() as u32;
    supermajority(count, view.population())
}

/// Runs the virtual-voting elections for every undecided witness.
///
/// Witnesses of the next round vote by seeing; witnesses of the round after
/// collect the votes of the voters they strongly see and decide once more
/// than two thirds of the population agree, otherwise they carry the
/// majority forward as their own vote.
pub fn elect_fame(view: &mut HashgraphView) {
    assign_rounds(view);
    let candidates: Vec<u32> = view.undecided.clone();
    let population = view.population();
    for w in candidates {
        let candidate_round = view.events[w as usize].round;
        let mut decision: Option<bool> = None;

        'voting: for v in candidate_round + 1..=view.max_round {
            let voters = view.witnesses_by_round[v as usize].clone();
            for u in voters {
                if view.votes.contains_key(&(u, w)) {
                    continue;
                }
                let vote = if v == candidate_round + 1 {
                    view.sees_ix(u, w)
                } else {
                    let previous = &view.witnesses_by_round[(v - 1) as usize];
                    let mut yes = 0u32;
                    let mut no = 0u32;
                    for &t in previous {
                        if view.strongly_sees_ix(u, t) {
                            match view.votes.get(&(t, w)) {
                                Some(true) => yes += 1,
                                Some(false) => no += 1,
                                None => {}
                            }
                        }
                    }
                    let majority = yes >= no;
                    let agreeing = yes.max(no);
                    if supermajority(agreeing, population) {
                        view.votes.insert((u, w), majority);
                        decision = Some(majority);
                        break 'voting;
                    }
                    majority
                };
                view.votes.insert((u, w), vote);
            }
        }

        if let Some(famous) = decision {
            view.events[w as usize].fame = if famous { Fame::Famous } else { Fame::NotFamous };
            view.undecided.retain(|&c| c != w);
        }
    }
    view.stalled_elections = view
        .undecided
        .iter()
        .filter(|&&w| view.max_round.saturating_sub(view.events[w as usize].round) > 10)
        .count();
}

/// Finalizes the total order round by round: once every witness of a round
/// has decided fame, each not-yet-ordered event seen by all of that round's
/// famous witnesses is received there. Its consensus timestamp is the
/// median of, per famous witness, the claimed time of the earliest event on
/// the witness's self-parent chain that sees it; the order key is
/// (received round, consensus time, id).
pub fn order_events(view: &mut HashgraphView) {
    elect_fame(view);
    loop {
        let r = view.next_receive_round;
        if r >= view.max_round {
            // Rounds at the frontier may still gain witnesses.
            break;
        }
        let witnesses = &view.witnesses_by_round[r as usize];
        if witnesses.is_empty() {
            break;
        }
        if witnesses
            .iter()
            .any(|&w| view.events[w as usize].fame == Fame::Undecided)
        {
            break;
        }
        let famous: Vec<u32> = witnesses
            .iter()
            .copied()
            .filter(|&w| view.events[w as usize].fame == Fame::Famous)
            .collect();
        if !famous.is_empty() {
            let mut received: Vec<(f64, crate::event::EventId, u32)> = Vec::new();
            for &e in &view.unordered {
                if famous.iter().all(|&f| view.sees_ix(f, e)) {
                    let mut times: Vec<f64> = famous
                        .iter()
                        .map(|&f| first_seeing_time(view, f, e))
                        .collect();
                    times.sort_by(f64::total_cmp);
                    let median = times[(times.len() - 1) / 2];
                    received.push((median, view.events[e as usize].id, e));
                }
            }
            received.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (median, _id, e) in received {
                let ev = &mut view.events[e as usize];
                ev.consensus_time = Some(median);
                ev.order_index = Some(view.next_order_index);
                view.received_round[e as usize] = Some(r);
                view.next_order_index += 1;
            }
            view.unordered.retain(|&e| view.events[e as usize].order_index.is_none());
        }
        view.next_receive_round += 1;
    }
}

/// Claimed time of the earliest event on `witness`'s self-parent chain that
/// still sees `target`.
fn first_seeing_time(view: &HashgraphView, witness: u32, target: u32) -> f64 {
    let mut at = witness;
    while let Some(sp) = view.self_parent_ix[at as usize] {
        if view.sees_ix(sp, target) {
            at = sp;
        } else {
            break;
        }
    }
    view.events[at as usize].claimed_time
}
