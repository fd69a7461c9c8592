//! Markov-chain model of a single transaction's path to confirmation.
//!
//! States track the transaction's cumulative weight above its own weight;
//! everything at or beyond the confirmation threshold merges into one
//! absorbing finality state. Per time step, arrivals follow a Poisson law
//! and each arrival independently approves the target with a state-dependent
//! probability, which yields the transition rows
//! `P[w][w+k] = sum_m Poisson(m) * Binomial(k; m, q(w))`.

mod calibrate;
mod chain;
mod model;

pub use calibrate::{calibrate_from_traces, CalibrationTrace, TraceBin};
pub use chain::{
    build_transition_matrix, expected_confirmation_delay, n_step_distribution, WeightMarkovChain,
};
pub use model::ApprovalModel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarkovError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("insufficient calibration data")]
    InsufficientData,
}
