use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dag_core::UnitId;

use crate::config::{Protocol, ScenarioConfig};

/// Cumulative-weight samples of one tracked transaction, observed at its
/// issuer's ledger. The first point is the issuance itself (weight 1).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrajectory {
    pub tx_id: UnitId,
    pub points: Vec<(f64, u64)>,
}

impl WeightTrajectory {
    pub fn issued_at(&self) -> f64 {
        self.points.first().map(|&(t, _)| t).unwrap_or(0.0)
    }
}

/// Measurements exported from one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub config: ScenarioConfig,
    pub confirmed_tps: f64,
    pub mean_confirmation_delay: f64,
    pub p95_confirmation_delay: f64,
    pub tip_count_series: Vec<(f64, u64)>,
    pub weight_trajectories: Vec<WeightTrajectory>,
    pub attack_won: bool,
    pub bytes_gossiped: u64,
    pub rounds_decided: u32,
    /// Conservation counts: every issued transaction is exactly one of
    /// confirmed, pending, or orphaned by conflict.
    pub issued_tx: u64,
    pub confirmed_tx: u64,
    pub pending_tx: u64,
    pub orphaned_tx: u64,
}

impl MetricsReport {
    pub fn empty(config: ScenarioConfig) -> Self {
        Self {
            config,
            confirmed_tps: 0.0,
            mean_confirmation_delay: f64::INFINITY,
            p95_confirmation_delay: f64::INFINITY,
            tip_count_series: Vec::new(),
            weight_trajectories: Vec::new(),
            attack_won: false,
            bytes_gossiped: 0,
            rounds_decided: 0,
            issued_tx: 0,
            confirmed_tx: 0,
            pending_tx: 0,
            orphaned_tx: 0,
        }
    }

    pub fn summary_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{},{},{}",
            match c.protocol {
                Protocol::Tangle => "tangle",
                Protocol::Hashgraph => "hashgraph",
            },
            c.node_count,
            c.arrival_rate,
            c.duration,
            c.confirmation_threshold,
            c.coordinator_enabled,
            c.attacker_power_fraction,
            self.confirmed_tps,
            self.mean_confirmation_delay,
            self.p95_confirmation_delay,
            self.attack_won,
            self.bytes_gossiped,
            c.seed
        )
    }
}

pub const SUMMARY_HEADER: &str = "protocol,nodes,lambda,duration_s,w_star,coordinator,attacker_power,confirmed_tps,mean_delay_s,p95_delay_s,attack_won,bytes_gossiped,seed";

fn write_atomically(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.flush()?;
    }
    fs::rename(&tmp, path)
}

/// Writes `<prefix>_summary.csv`, `<prefix>_tips.csv` and
/// `<prefix>_weights.csv`. Writes are atomic (temp file plus rename) and
/// newline-terminated with `\n` separators.
pub fn export_metrics(report: &MetricsReport, prefix: &str) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(3);

    let mut summary = String::new();
    summary.push_str(SUMMARY_HEADER);
    summary.push('\n');
    summary.push_str(&report.summary_row());
    summary.push('\n');
    let path = PathBuf::from(format!("{prefix}_summary.csv"));
    write_atomically(&path, summary.as_bytes())?;
    written.push(path);

    let mut tips = String::from("time_s,tip_count\n");
    for &(t, count) in &report.tip_count_series {
        tips.push_str(&format!("{t:.3},{count}\n"));
    }
    let path = PathBuf::from(format!("{prefix}_tips.csv"));
    write_atomically(&path, tips.as_bytes())?;
    written.push(path);

    let mut weights = String::from("tx_id,time_s,cumulative_weight\n");
    for trajectory in &report.weight_trajectories {
        for &(t, w) in &trajectory.points {
            weights.push_str(&format!("{},{t:.3},{w}\n", trajectory.tx_id));
        }
    }
    let path = PathBuf::from(format!("{prefix}_weights.csv"));
    write_atomically(&path, weights.as_bytes())?;
    written.push(path);

    Ok(written)
}

/// Step-function value of a trajectory `offset` seconds after its issuance.
pub fn trajectory_value_at(trajectory: &WeightTrajectory, offset: f64) -> f64 {
    let start = trajectory.issued_at();
    let mut value = trajectory.points.first().map(|&(_, w)| w).unwrap_or(0) as f64;
    for &(t, w) in &trajectory.points {
        if t - start <= offset {
            value = w as f64;
        } else {
            break;
        }
    }
    value
}

/// Mean cumulative-weight curve across trajectories, aligned on time since
/// issuance and sampled at the given offsets.
pub fn mean_trajectory_on_grid(trajectories: &[WeightTrajectory], grid: &[f64]) -> Vec<f64> {
    if trajectories.is_empty() {
        return vec![0.0; grid.len()];
    }
    grid.iter()
        .map(|&offset| {
            trajectories
                .iter()
                .map(|t| trajectory_value_at(t, offset))
                .sum::<f64>()
                / trajectories.len() as f64
        })
        .collect()
}
