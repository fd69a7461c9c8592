use std::collections::HashMap;

use dag_core::{InsertOutcome, NodeId, Payload, TangleLedger, TangleUnit, Transaction, UnitId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use tangle_engine::{
    build_unit, coordinator_tick, issue_unit, resolve_conflicts, select_lazy_parents,
    validate_unit, Coordinator, ConflictTracker, PoWPuzzle, TipSelectionAlgo, Validation,
};

use crate::config::{Protocol, ScenarioConfig};
use crate::metrics::{MetricsReport, WeightTrajectory};
use crate::queue::EventQueue;
use crate::rng::{stream, streams};
use crate::SimError;

const MAX_TRACKED_TRAJECTORIES: usize = 200;
const TIP_SAMPLES: f64 = 120.0;

enum SimEvent {
    Arrival,
    Delivery { unit: TangleUnit, to: usize },
    CoordinatorTick,
    TipSample,
    AttackerIssue,
}

/// One node's full local state: ledger replica, double-spend bookkeeping,
/// and units parked until their parents arrive.
struct Replica {
    node: NodeId,
    ledger: TangleLedger,
    tracker: ConflictTracker,
    parked: HashMap<UnitId, Vec<TangleUnit>>,
}

impl Replica {
    fn new(node: NodeId, threshold: u64) -> Self {
        let (ledger, genesis) = TangleLedger::with_genesis(threshold, 0.0);
        let mut tracker = ConflictTracker::default();
        tracker.record(&ledger, genesis);
        Self {
            node,
            ledger,
            tracker,
            parked: HashMap::new(),
        }
    }

    /// Validates and inserts a delivered unit, parking it when parents are
    /// still missing and draining any units that were waiting on it.
    fn receive(&mut self, unit: TangleUnit, puzzle: &PoWPuzzle) -> Vec<InsertOutcome> {
        let mut outcomes = Vec::new();
        let mut work = vec![unit];
        while let Some(unit) = work.pop() {
            if let Some(&missing) = unit.parents.iter().find(|p| !self.ledger.contains(**p)) {
                self.parked.entry(missing).or_default().push(unit);
                continue;
            }
            if self.ledger.contains(unit.id) {
                continue;
            }
            match validate_unit(&self.ledger, &unit, puzzle, &self.tracker) {
                Validation::Accept => {
                    let outcome = self.ledger.insert_unit(unit).expect("validated unit inserts");
                    self.tracker.record(&self.ledger, outcome.id);
                    if let Some(waiters) = self.parked.remove(&outcome.id) {
                        work.extend(waiters);
                    }
                    outcomes.push(outcome);
                }
                Validation::Reject(_) => {}
            }
        }
        outcomes
    }
}

struct AttackState {
    arbiter: Replica,
    rate: f64,
    attacker_id: NodeId,
    target_output: u64,
    target_unit: Option<UnitId>,
    conflict_unit: Option<UnitId>,
    branch_tips: Vec<UnitId>,
    target_confirmed: bool,
    won: bool,
}

/// Event-driven Tangle simulation over full-broadcast replicas. Stepping is
/// exposed so tests can observe intermediate states.
pub struct TangleSim {
    config: ScenarioConfig,
    now: f64,
    queue: EventQueue<SimEvent>,
    replicas: Vec<Replica>,
    coordinator: Option<Coordinator>,
    algo: TipSelectionAlgo,
    puzzle: PoWPuzzle,
    honest_rate: f64,
    rng_arrivals: ChaCha8Rng,
    rng_issuer: ChaCha8Rng,
    rng_latency: ChaCha8Rng,
    rng_selection: ChaCha8Rng,
    rng_pow: ChaCha8Rng,
    rng_coordinator: ChaCha8Rng,
    rng_attacker: ChaCha8Rng,
    next_output: u64,
    issue_times: HashMap<UnitId, f64>,
    confirm_times: HashMap<UnitId, f64>,
    issued_order: Vec<UnitId>,
    tracked: Vec<WeightTrajectory>,
    tracked_at: Vec<Vec<(UnitId, usize)>>,
    tip_series: Vec<(f64, u64)>,
    attack: Option<AttackState>,
}

impl TangleSim {
    pub fn new(config: &ScenarioConfig) -> Result<Self, SimError> {
        config.validate()?;
        if config.protocol != Protocol::Tangle {
            return Err(SimError::InvalidConfig {
                field: "protocol",
                message: "tangle simulation requires protocol = tangle".into(),
            });
        }
        let coordinator_replica = config.coordinator_enabled as usize;
        let replica_count = config.node_count as usize + coordinator_replica;
        let replicas: Vec<Replica> = (0..replica_count)
            .map(|n| Replica::new(n as NodeId, config.confirmation_threshold))
            .collect();

        let attacker_share = if config.attacker_enabled {
            config.attacker_power_fraction
        } else {
            0.0
        };
        let honest_rate = config.arrival_rate * (1.0 - attacker_share);

        let mut sim = Self {
            config: config.clone(),
            now: 0.0,
            queue: EventQueue::new(),
            replicas,
            coordinator: config.coordinator_enabled.then(|| {
                Coordinator::new(true, config.coordinator_interval, config.node_count)
            }),
            algo: config.tip_selection(),
            puzzle: config.puzzle(),
            honest_rate,
            rng_arrivals: stream(config.seed, streams::ARRIVALS),
            rng_issuer: stream(config.seed, streams::ISSUER_PICK),
            rng_latency: stream(config.seed, streams::LATENCY),
            rng_selection: stream(config.seed, streams::SELECTION),
            rng_pow: stream(config.seed, streams::POW),
            rng_coordinator: stream(config.seed, streams::COORDINATOR),
            rng_attacker: stream(config.seed, streams::ATTACKER),
            next_output: 0,
            issue_times: HashMap::new(),
            confirm_times: HashMap::new(),
            issued_order: Vec::new(),
            tracked: Vec::new(),
            tracked_at: vec![Vec::new(); replica_count + 1],
            tip_series: Vec::new(),
            attack: config.attacker_enabled.then(|| AttackState {
                arbiter: Replica::new(config.node_count + 1, config.confirmation_threshold),
                rate: config.arrival_rate * attacker_share,
                attacker_id: config.node_count + 1,
                target_output: config.attacker_target_output,
                target_unit: None,
                conflict_unit: None,
                branch_tips: Vec::new(),
                target_confirmed: false,
                won: false,
            }),
        };

        if sim.honest_rate > 0.0 {
            let dt = sim.next_interval(sim.honest_rate);
            sim.queue.push(dt, SimEvent::Arrival);
        }
        if sim.coordinator.is_some() {
            sim.queue.push(config.coordinator_interval, SimEvent::CoordinatorTick);
        }
        sim.queue.push(0.0, SimEvent::TipSample);
        Ok(sim)
    }

    fn next_interval(&mut self, rate: f64) -> f64 {
        let exp = Exp::new(rate).expect("positive rate");
        self.now + exp.sample(&mut self.rng_arrivals)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn replica_ledger(&self, node: u32) -> &TangleLedger {
        &self.replicas[node as usize].ledger
    }

    /// Processes queued events with timestamps up to `until`.
    pub fn run_until(&mut self, until: f64) {
        let horizon = until.min(self.config.duration);
        while let Some(time) = self.queue.peek_time() {
            if time > horizon {
                break;
            }
            let (time, event) = self.queue.pop().expect("peeked");
            self.now = time;
            self.handle(event);
        }
        self.now = horizon;
    }

    fn handle(&mut self, event: SimEvent) {
        match event {
            SimEvent::Arrival => self.handle_arrival(),
            SimEvent::Delivery { unit, to } => self.handle_delivery(unit, to),
            SimEvent::CoordinatorTick => self.handle_coordinator_tick(),
            SimEvent::TipSample => self.handle_tip_sample(),
            SimEvent::AttackerIssue => self.handle_attacker_issue(),
        }
    }

    fn handle_arrival(&mut self) {
        let next = self.next_interval(self.honest_rate);
        self.queue.push(next, SimEvent::Arrival);

        let issuer = self.rng_issuer.gen_range(0..self.config.node_count) as usize;
        let lazy_cutoff = self.config.node_count - self.config.lazy_node_count();
        let payload = Payload::Transaction(Transaction {
            sender: issuer as NodeId,
            consumed_output: self.next_output,
            amount: 1,
        });
        self.next_output += 1;

        let replica = &self.replicas[issuer];
        let unit = if (issuer as u32) >= lazy_cutoff {
            let parents = select_lazy_parents(
                &replica.ledger,
                self.config.lazy_depth,
                self.algo.walker_count,
                &mut self.rng_selection,
            );
            build_unit(replica.node, parents, payload, &self.puzzle, self.now, &mut self.rng_pow)
        } else {
            match issue_unit(
                replica.node,
                &replica.ledger,
                payload,
                &self.algo,
                &self.puzzle,
                &replica.tracker,
                self.now,
                &mut self.rng_selection,
            ) {
                Ok(mut unit) => {
                    // issue_unit draws the nonce from the selection stream;
                    // redo the puzzle on the dedicated stream so selection
                    // draws stay independent of difficulty.
                    let mut preimage = dag_core::canonical_preimage(
                        unit.issuer,
                        &unit.parents,
                        &unit.payload,
                        unit.own_weight,
                        0,
                        unit.issued_at,
                    );
                    let (nonce, _) = self.puzzle.solve(&mut preimage, &mut self.rng_pow);
                    unit.nonce = nonce;
                    unit.id = preimage.id();
                    unit.signature = tangle_engine::sign_preimage(unit.issuer, &preimage);
                    unit
                }
                Err(_) => return,
            }
        };

        self.register_issue(&unit);
        self.deliver_everywhere(unit, issuer);
    }

    fn register_issue(&mut self, unit: &TangleUnit) {
        if !unit.payload.is_zero_value() {
            self.issue_times.insert(unit.id, self.now);
            self.issued_order.push(unit.id);
        }
        let window_start = self.config.warmup_end();
        let window_end = self.config.duration * 0.3;
        if !unit.payload.is_zero_value()
            && self.now >= window_start
            && self.now <= window_end
            && self.tracked.len() < MAX_TRACKED_TRAJECTORIES
        {
            let slot = self.tracked.len();
            self.tracked.push(WeightTrajectory {
                tx_id: unit.id,
                points: vec![(self.now, unit.own_weight)],
            });
            self.tracked_at[unit.issuer as usize].push((unit.id, slot));
        }
    }

    /// Inserts at the issuer immediately and schedules deliveries to every
    /// other replica (and the attack arbiter) with independent latency
    /// draws.
    fn deliver_everywhere(&mut self, unit: TangleUnit, issuer: usize) {
        let outcomes = self.replicas[issuer].receive(unit.clone(), &self.puzzle);
        self.absorb_outcomes(issuer, &outcomes);
        for to in 0..self.replicas.len() {
            if to == issuer {
                continue;
            }
            let latency = self.config.sample_latency(&mut self.rng_latency);
            self.queue.push(self.now + latency, SimEvent::Delivery { unit: unit.clone(), to });
        }
        if self.attack.is_some() {
            let latency = self.config.sample_latency(&mut self.rng_latency);
            let arbiter = self.replicas.len();
            self.queue.push(self.now + latency, SimEvent::Delivery { unit, to: arbiter });
        }
    }

    fn handle_delivery(&mut self, unit: TangleUnit, to: usize) {
        if to == self.replicas.len() {
            self.arbiter_receive(unit);
            return;
        }
        let outcomes = self.replicas[to].receive(unit, &self.puzzle);
        self.absorb_outcomes(to, &outcomes);
    }

    fn arbiter_receive(&mut self, unit: TangleUnit) {
        let Some(mut attack) = self.attack.take() else {
            return;
        };
        let outcomes = attack.arbiter.receive(unit, &self.puzzle);
        for outcome in &outcomes {
            // The conflicting transaction spends the same output as the
            // honest target, approving exactly the state the target
            // approved.
            let stored = attack.arbiter.ledger.unit(outcome.id).expect("inserted");
            if attack.target_unit.is_none()
                && stored.payload.consumed_output() == Some(attack.target_output)
            {
                attack.target_unit = Some(outcome.id);
                let parents = stored.parents.clone();
                let conflict = build_unit(
                    attack.attacker_id,
                    parents,
                    Payload::Transaction(Transaction {
                        sender: attack.attacker_id,
                        consumed_output: attack.target_output,
                        amount: 1,
                    }),
                    &self.puzzle,
                    self.now,
                    &mut self.rng_attacker,
                );
                self.issue_times.insert(conflict.id, self.now);
                self.issued_order.push(conflict.id);
                let inserted = attack.arbiter.receive(conflict.clone(), &self.puzzle);
                debug_assert_eq!(inserted.len(), 1);
                attack.conflict_unit = Some(conflict.id);
                attack.branch_tips = vec![conflict.id];
                if attack.rate > 0.0 {
                    let exp = Exp::new(attack.rate).expect("positive rate");
                    let dt = exp.sample(&mut self.rng_attacker);
                    self.queue.push(self.now + dt, SimEvent::AttackerIssue);
                }
            }
        }
        Self::evaluate_race(&mut attack);
        self.attack = Some(attack);
    }

    fn handle_attacker_issue(&mut self) {
        let Some(mut attack) = self.attack.take() else {
            return;
        };
        if attack.rate > 0.0 {
            let exp = Exp::new(attack.rate).expect("positive rate");
            let dt = exp.sample(&mut self.rng_attacker);
            self.queue.push(self.now + dt, SimEvent::AttackerIssue);
        }
        if !attack.branch_tips.is_empty() {
            let parents = attack.branch_tips.clone();
            let unit = build_unit(
                attack.attacker_id,
                parents,
                Payload::ZeroValue,
                &self.puzzle,
                self.now,
                &mut self.rng_attacker,
            );
            let id = unit.id;
            let outcomes = attack.arbiter.receive(unit, &self.puzzle);
            debug_assert_eq!(outcomes.len(), 1);
            attack.branch_tips.insert(0, id);
            attack.branch_tips.truncate(2);
            Self::evaluate_race(&mut attack);
        }
        self.attack = Some(attack);
    }

    /// The attack succeeds if, at any time after the honest target is
    /// confirmed, the private branch outweighs it on the attacker's merged
    /// view.
    fn evaluate_race(attack: &mut AttackState) {
        let (Some(target), Some(conflict)) = (attack.target_unit, attack.conflict_unit) else {
            return;
        };
        let ledger = &attack.arbiter.ledger;
        let target_weight = ledger.cumulative_weight(target).expect("target stored");
        if !attack.target_confirmed && target_weight >= ledger.confirmation_threshold() {
            attack.target_confirmed = true;
        }
        if attack.target_confirmed {
            let branch_weight = ledger.cumulative_weight(conflict).expect("conflict stored");
            if branch_weight > target_weight {
                attack.won = true;
            }
        }
    }

    fn handle_coordinator_tick(&mut self) {
        let Some(mut coordinator) = self.coordinator.take() else {
            return;
        };
        self.queue.push(self.now + coordinator.interval, SimEvent::CoordinatorTick);
        let replica_ix = self.config.node_count as usize;
        let unit = coordinator_tick(
            &self.replicas[replica_ix].ledger,
            &mut coordinator,
            &self.puzzle,
            self.now,
            &mut self.rng_coordinator,
        );
        self.coordinator = Some(coordinator);
        if let Some(unit) = unit {
            self.register_issue(&unit);
            self.deliver_everywhere(unit, replica_ix);
        }
    }

    fn handle_tip_sample(&mut self) {
        self.tip_series.push((self.now, self.replicas[0].ledger.tip_count() as u64));
        let step = self.config.duration / TIP_SAMPLES;
        if self.now + step <= self.config.duration {
            self.queue.push(self.now + step, SimEvent::TipSample);
        }
    }

    fn absorb_outcomes(&mut self, replica_ix: usize, outcomes: &[InsertOutcome]) {
        if outcomes.is_empty() {
            return;
        }
        let replica = &self.replicas[replica_ix];
        for outcome in outcomes {
            for confirmed in &outcome.newly_confirmed {
                let unit = replica.ledger.unit(*confirmed).expect("confirmed unit stored");
                if unit.issuer == replica.node && !unit.payload.is_zero_value() {
                    self.confirm_times.entry(*confirmed).or_insert(self.now);
                }
            }
        }
        if !self.tracked_at[replica_ix].is_empty() {
            let ledger = &self.replicas[replica_ix].ledger;
            let mut updates = Vec::new();
            for &(id, slot) in &self.tracked_at[replica_ix] {
                let weight = ledger.cumulative_weight(id).expect("tracked unit stored");
                let last = self.tracked[slot].points.last().map(|&(_, w)| w).unwrap_or(0);
                if weight > last {
                    updates.push((slot, weight));
                }
            }
            for (slot, weight) in updates {
                self.tracked[slot].points.push((self.now, weight));
            }
        }
    }

    pub fn into_report(mut self) -> MetricsReport {
        let config = self.config.clone();
        let warmup = config.warmup_end();
        let window = config.duration - warmup;

        // Conflict losers are orphaned along with the confirmations they
        // would have displaced.
        let mut orphaned: Vec<UnitId> = Vec::new();
        if let Some(attack) = &self.attack {
            if let (Some(target), Some(conflict)) = (attack.target_unit, attack.conflict_unit) {
                let winner =
                    resolve_conflicts(&attack.arbiter.ledger, &[target, conflict]).expect("set");
                let loser = if winner == target { conflict } else { target };
                orphaned.push(loser);
                self.confirm_times.remove(&loser);
            }
        }

        let mut delays: Vec<f64> = Vec::new();
        let mut confirmed_in_window = 0u64;
        for (id, &issued) in &self.issue_times {
            if issued < warmup {
                continue;
            }
            if let Some(&confirmed) = self.confirm_times.get(id) {
                delays.push(confirmed - issued);
                confirmed_in_window += 1;
            }
        }
        delays.sort_by(f64::total_cmp);
        let mean = if delays.is_empty() {
            f64::INFINITY
        } else {
            delays.iter().sum::<f64>() / delays.len() as f64
        };
        let p95 = if delays.is_empty() {
            f64::INFINITY
        } else {
            delays[((delays.len() as f64 * 0.95).ceil() as usize).min(delays.len()) - 1]
        };

        let issued_tx = self.issue_times.len() as u64;
        let confirmed_tx = self.confirm_times.len() as u64;
        let orphaned_tx = orphaned.len() as u64;

        MetricsReport {
            confirmed_tps: confirmed_in_window as f64 / window,
            mean_confirmation_delay: mean,
            p95_confirmation_delay: p95,
            tip_count_series: self.tip_series,
            weight_trajectories: self.tracked,
            attack_won: self.attack.as_ref().map(|a| a.won).unwrap_or(false),
            bytes_gossiped: 0,
            rounds_decided: 0,
            issued_tx,
            confirmed_tx,
            pending_tx: issued_tx - confirmed_tx - orphaned_tx,
            orphaned_tx,
            config,
        }
    }
}

/// Plain Tangle run: Poisson arrivals, optional coordinator and lazy nodes.
pub fn run_tangle(config: &ScenarioConfig) -> Result<MetricsReport, SimError> {
    let mut sim = TangleSim::new(config)?;
    sim.run_until(config.duration);
    Ok(sim.into_report())
}

/// Double-spend scenario: the attacker mirrors the honest target
/// transaction, withholds a private branch issued at its share of the total
/// rate, and wins if that branch ever outweighs the confirmed target.
pub fn run_double_spend(config: &ScenarioConfig) -> Result<MetricsReport, SimError> {
    if !config.attacker_enabled {
        return Err(SimError::InvalidConfig {
            field: "attacker_enabled",
            message: "double-spend scenario requires the attacker".into(),
        });
    }
    let mut sim = TangleSim::new(config)?;
    sim.run_until(config.duration);
    Ok(sim.into_report())
}

/// Runs the scenario matching the configuration: hashgraph, double spend,
/// or plain Tangle.
pub fn run_scenario(config: &ScenarioConfig) -> Result<MetricsReport, SimError> {
    config.validate()?;
    match config.protocol {
        Protocol::Hashgraph => crate::hashgraph_sim::run_hashgraph_scenario(config),
        Protocol::Tangle if config.attacker_enabled => run_double_spend(config),
        Protocol::Tangle => run_tangle(config),
    }
}
