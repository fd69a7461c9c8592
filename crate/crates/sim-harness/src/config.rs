use rand::Rng;

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Tangle,
    Hashgraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TipAlgoKind {
    Uniform,
    Mcmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatencyKind {
    Fixed,
    Uniform,
    Exponential,
}

/// Full description of one simulation run. The field names double as the
/// `key = value` config-file vocabulary (lower snake case).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub node_count: u32,
    /// Tangle: network-wide transactions per second. Hashgraph: per-node
    /// payload rate.
    pub arrival_rate: f64,
    pub duration: f64,
    pub seed: u64,
    pub latency_model: LatencyKind,
    pub latency_fixed: f64,
    pub latency_lo: f64,
    pub latency_hi: f64,
    pub latency_mean: f64,
    pub confirmation_threshold: u64,
    pub tip_algo: TipAlgoKind,
    pub mcmc_alpha: f64,
    pub walk_start_depth: u32,
    pub walker_count: u32,
    pub puzzle_bits: u32,
    pub coordinator_enabled: bool,
    pub coordinator_interval: f64,
    pub attacker_enabled: bool,
    pub attacker_power_fraction: f64,
    pub attacker_target_output: u64,
    pub lazy_enabled: bool,
    pub lazy_fraction: f64,
    pub lazy_depth: u32,
    pub gossip_interval: f64,
    pub byzantine_fork_nodes: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Tangle,
            node_count: 4,
            arrival_rate: 1.0,
            duration: 60.0,
            seed: 42,
            latency_model: LatencyKind::Fixed,
            latency_fixed: 0.01,
            latency_lo: 0.0,
            latency_hi: 0.02,
            latency_mean: 0.01,
            confirmation_threshold: 50,
            tip_algo: TipAlgoKind::Mcmc,
            mcmc_alpha: 0.5,
            walk_start_depth: 20,
            walker_count: 2,
            puzzle_bits: 8,
            coordinator_enabled: false,
            coordinator_interval: 5.0,
            attacker_enabled: false,
            attacker_power_fraction: 0.0,
            attacker_target_output: 0,
            lazy_enabled: false,
            lazy_fraction: 0.0,
            lazy_depth: 5,
            gossip_interval: 0.5,
            byzantine_fork_nodes: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |field: &'static str, message: String| {
            Err(SimError::InvalidConfig { field, message })
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.node_count < 1 {
            return fail("node_count", "must be at least 1".into());
        }
        if self.protocol == Protocol::Hashgraph && self.node_count < 2 {
            return fail("node_count", "hashgraph needs at least 2 nodes".into());
        }
        if !self.arrival_rate.is_finite() || self.arrival_rate < 0.0 {
            return fail(
                "arrival_rate",
                format!("must be non-negative, got {}", self.arrival_rate),
            );
        }
        if !positive(self.duration) {
            return fail("duration", format!("must be positive, got {}", self.duration));
        }
        for (field, value) in [
            ("latency_fixed", self.latency_fixed),
            ("latency_lo", self.latency_lo),
            ("latency_hi", self.latency_hi),
            ("latency_mean", self.latency_mean),
        ] {
            if !value.is_finite() || value < 0.0 {
                return fail(field, format!("must be non-negative, got {value}"));
            }
        }
        if self.latency_model == LatencyKind::Uniform && self.latency_hi < self.latency_lo {
            return fail("latency_hi", "must not be below latency_lo".into());
        }
        if self.confirmation_threshold < 1 {
            return fail("confirmation_threshold", "must be at least 1".into());
        }
        if !self.mcmc_alpha.is_finite() || self.mcmc_alpha < 0.0 {
            return fail("mcmc_alpha", format!("must be non-negative, got {}", self.mcmc_alpha));
        }
        if self.walker_count < 1 {
            return fail("walker_count", "must be at least 1".into());
        }
        if self.puzzle_bits < 1 || self.puzzle_bits > 32 {
            return fail("puzzle_bits", format!("must be in 1..=32, got {}", self.puzzle_bits));
        }
        if self.coordinator_enabled && !positive(self.coordinator_interval) {
            return fail(
                "coordinator_interval",
                format!("must be positive, got {}", self.coordinator_interval),
            );
        }
        if !(0.0..1.0).contains(&self.attacker_power_fraction) {
            return fail(
                "attacker_power_fraction",
                format!("must be in [0, 1), got {}", self.attacker_power_fraction),
            );
        }
        if !(0.0..=1.0).contains(&self.lazy_fraction) {
            return fail(
                "lazy_fraction",
                format!("must be in [0, 1], got {}", self.lazy_fraction),
            );
        }
        if !positive(self.gossip_interval) {
            return fail(
                "gossip_interval",
                format!("must be positive, got {}", self.gossip_interval),
            );
        }
        if self.byzantine_fork_nodes >= self.node_count {
            return fail("byzantine_fork_nodes", "must be below node_count".into());
        }
        Ok(())
    }

    pub fn sample_latency(&self, rng: &mut impl Rng) -> f64 {
        match self.latency_model {
            LatencyKind::Fixed => self.latency_fixed,
            LatencyKind::Uniform => {
                if self.latency_hi <= self.latency_lo {
                    self.latency_lo
                } else {
                    rng.gen_range(self.latency_lo..self.latency_hi)
                }
            }
            LatencyKind::Exponential => {
                if self.latency_mean <= 0.0 {
                    0.0
                } else {
                    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                    -u.ln() * self.latency_mean
                }
            }
        }
    }

    /// End of the measurement warm-up: the first tenth of the run.
    pub fn warmup_end(&self) -> f64 {
        self.duration * 0.1
    }

    pub fn tip_selection(&self) -> tangle_engine::TipSelectionAlgo {
        tangle_engine::TipSelectionAlgo {
            variant: match self.tip_algo {
                TipAlgoKind::Uniform => tangle_engine::SelectionVariant::UniformRandom,
                TipAlgoKind::Mcmc => tangle_engine::SelectionVariant::WeightedMCMC,
            },
            mcmc_alpha: self.mcmc_alpha,
            walk_start_depth: self.walk_start_depth,
            walker_count: self.walker_count as usize,
        }
    }

    pub fn puzzle(&self) -> tangle_engine::PoWPuzzle {
        tangle_engine::PoWPuzzle::new(self.puzzle_bits)
    }

    /// Count of lazy issuers (the highest node ids act lazily).
    pub fn lazy_node_count(&self) -> u32 {
        if self.lazy_enabled {
            ((self.node_count as f64 * self.lazy_fraction).floor() as u32).min(self.node_count)
        } else {
            0
        }
    }
}
