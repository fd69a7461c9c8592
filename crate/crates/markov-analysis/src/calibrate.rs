use crate::model::ApprovalModel;
use crate::MarkovError;

/// One time-step observation: at weight state `state`, `arrivals` new units
/// entered the network and `approvals` of them (directly or indirectly)
/// approved the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBin {
    pub state: u64,
    pub arrivals: f64,
    pub approvals: f64,
}

/// Per-step observations pooled from weight trajectories.
#[derive(Debug, Clone, Default)]
pub struct CalibrationTrace {
    pub trajectory_count: usize,
    pub bins: Vec<TraceBin>,
}

const MIN_TRAJECTORIES: usize = 100;
const MIN_BUCKET_ARRIVALS: f64 = 10.0;

/// Estimates the empirical approval probability per weight state:
/// `q(w) = approvals(w) / arrivals(w)`, clamped to [0, 1]. Buckets with
/// fewer than ten observed arrivals borrow the nearest well-observed
/// bucket's estimate.
pub fn calibrate_from_traces(
    trace: &CalibrationTrace,
    w_star: u64,
) -> Result<ApprovalModel, MarkovError> {
    if trace.trajectory_count < MIN_TRAJECTORIES || trace.bins.is_empty() {
        return Err(MarkovError::InsufficientData);
    }
    let states = w_star.saturating_sub(1).max(1) as usize;
    let mut arrivals = vec![0.0f64; states];
    let mut approvals = vec![0.0f64; states];
    for bin in &trace.bins {
        let w = bin.state as usize;
        if w >= states {
            continue;
        }
        arrivals[w] += bin.arrivals;
        approvals[w] += bin.approvals;
    }

    let filled: Vec<usize> = (0..states)
        .filter(|&w| arrivals[w] >= MIN_BUCKET_ARRIVALS)
        .collect();
    if filled.is_empty() {
        return Err(MarkovError::InsufficientData);
    }
    let table: Vec<f64> = (0..states)
        .map(|w| {
            let source = if arrivals[w] >= MIN_BUCKET_ARRIVALS {
                w
            } else {
                *filled
                    .iter()
                    .min_by_key(|&&f| (f.abs_diff(w), f))
                    .expect("non-empty")
            };
            (approvals[source] / arrivals[source]).clamp(0.0, 1.0)
        })
        .collect();
    Ok(ApprovalModel::Empirical(table))
}
