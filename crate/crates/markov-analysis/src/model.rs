use std::fmt;

/// Probability that one new arrival (directly or indirectly) approves the
/// target, as a function of the target's weight state.
#[derive(Debug, Clone, PartialEq)]
pub enum ApprovalModel {
    /// State-independent approval probability.
    ConstantQ(f64),
    /// Low probability during the adaptation phase, then `q_high` once the
    /// target's weight has spread through the frontier.
    TwoPhase {
        adaptation_weight: u64,
        q_low: f64,
        q_high: f64,
    },
    /// Per-state table estimated from simulation traces; states beyond the
    /// table clamp to the last entry.
    Empirical(Vec<f64>),
}

impl ApprovalModel {
    pub fn two_phase(adaptation_weight: u64, q_low: f64) -> Self {
        ApprovalModel::TwoPhase {
            adaptation_weight,
            q_low,
            q_high: 1.0,
        }
    }

    pub fn q(&self, state: u64) -> f64 {
        match self {
            ApprovalModel::ConstantQ(q) => *q,
            ApprovalModel::TwoPhase {
                adaptation_weight,
                q_low,
                q_high,
            } => {
                if state < *adaptation_weight {
                    *q_low
                } else {
                    *q_high
                }
            }
            ApprovalModel::Empirical(table) => {
                if table.is_empty() {
                    0.0
                } else {
                    table[(state as usize).min(table.len() - 1)]
                }
            }
        }
    }

    /// All probabilities must sit in [0, 1]; the adaptation weight must lie
    /// below the confirmation threshold.
    pub fn validate(&self, w_star: u64) -> Result<(), String> {
        let check = |q: f64, name: &str| {
            if !(0.0..=1.0).contains(&q) || q.is_nan() {
                Err(format!("{name} must be in [0, 1], got {q}"))
            } else {
                Ok(())
            }
        };
        match self {
            ApprovalModel::ConstantQ(q) => check(*q, "q"),
            ApprovalModel::TwoPhase {
                adaptation_weight,
                q_low,
                q_high,
            } => {
                check(*q_low, "q_low")?;
                check(*q_high, "q_high")?;
                if *adaptation_weight >= w_star {
                    return Err(format!(
                        "adaptation_weight {adaptation_weight} must be below w_star {w_star}"
                    ));
                }
                Ok(())
            }
            ApprovalModel::Empirical(table) => {
                for (i, q) in table.iter().enumerate() {
                    check(*q, &format!("q[{i}]"))?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ApprovalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApprovalModel::ConstantQ(q) => write!(f, "constant_q:{q}"),
            ApprovalModel::TwoPhase {
                adaptation_weight,
                q_low,
                q_high,
            } => write!(f, "two_phase:{adaptation_weight}:{q_low}:{q_high}"),
            ApprovalModel::Empirical(_) => write!(f, "empirical"),
        }
    }
}
