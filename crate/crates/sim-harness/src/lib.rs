//! Discrete-event simulation harness for the two DAG consensus engines:
//! Poisson transaction arrivals, configurable link latency, honest, lazy,
//! byzantine and attacking node behaviors, metric collection, and CSV
//! export. A scenario is fully determined by its configuration and seed.

mod config;
mod hashgraph_sim;
mod metrics;
mod queue;
mod rng;
mod tangle_sim;

pub use config::{LatencyKind, Protocol, ScenarioConfig, TipAlgoKind};
pub use hashgraph_sim::{run_hashgraph_scenario, run_hashgraph_with_views};
pub use metrics::{
    export_metrics, mean_trajectory_on_grid, trajectory_value_at, MetricsReport, WeightTrajectory,
};
pub use queue::EventQueue;
pub use tangle_sim::{run_double_spend, run_scenario, run_tangle, TangleSim};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid config: {field}: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },
}
