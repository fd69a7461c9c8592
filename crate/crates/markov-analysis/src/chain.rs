use std::io::{self, Write};

use crate::model::ApprovalModel;
use crate::MarkovError;

/// Row-stochastic transition matrix over weight states per time step.
///
/// Indices `0..w_star-1` are the transient weight levels (weight above the
/// target's own weight), index `w_star` is the absorbing finality state, and
/// index `w_star - 1` — the threshold level itself — forwards straight to
/// finality, since every level at or above `w_star - 1` is merged into it.
#[derive(Debug, Clone)]
pub struct WeightMarkovChain {
    pub w_star: u64,
    pub arrival_rate: f64,
    pub time_step: f64,
    /// `(w_star + 1) x (w_star + 1)`, row major.
    matrix: Vec<Vec<f64>>,
}

impl WeightMarkovChain {
    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    pub fn finality_state(&self) -> usize {
        self.w_star as usize
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.matrix[state]
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.matrix[from][to]
    }

    /// Comma-separated rows preceded by a `# states=.. lambda=.. dt=..`
    /// header line.
    pub fn export_matrix(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(
            out,
            "# states={} lambda={} dt={}",
            self.states(),
            self.arrival_rate,
            self.time_step
        )?;
        for row in &self.matrix {
            let line: Vec<String> = row.iter().map(|p| format!("{p:.12e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Poisson pmf values `P(m)` for `m = 0..limit` at mean `mu`.
fn poisson_pmf(mu: f64, limit: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(limit + 1);
    let mut p = (-mu).exp();
    pmf.push(p);
    for m in 1..=limit {
        p *= mu / m as f64;
        pmf.push(p);
    }
    pmf
}

/// Transition row for a transient state: probabilities of gaining
/// `0..=max_gain` approvals in one step, where arrivals are Poisson with
/// mean `mu` and each approves independently with probability `q`. Computed
/// by direct summation over the arrival count.
fn gain_probabilities(mu: f64, q: f64, max_gain: usize) -> Vec<f64> {
    let limit = (mu + 12.0 * (mu + 1.0).sqrt() + 60.0).ceil() as usize;
    let pois = poisson_pmf(mu, limit);
    let mut acc = vec![0.0f64; max_gain + 1];
    if q >= 1.0 {
        for k in 0..=max_gain.min(limit) {
            acc[k] = pois[k];
        }
        return acc;
    }
    if q <= 0.0 {
        acc[0] = 1.0;
        return acc;
    }
    for (m, &pm) in pois.iter().enumerate() {
        // Binomial(k; m, q) by recurrence in k.
        let mut binom = (1.0 - q).powi(m as i32);
        for k in 0..=m.min(max_gain) {
            acc[k] += pm * binom;
            binom *= (m - k) as f64 / (k + 1) as f64 * q / (1.0 - q);
        }
    }
    acc
}

/// Builds the per-step transition matrix for arrival rate `lambda`, step
/// length `dt`, confirmation threshold `w_star`, and the given approval
/// model. Mass that would land at or beyond level `w_star - 1` goes to the
/// finality state.
pub fn build_transition_matrix(
    lambda: f64,
    dt: f64,
    w_star: u64,
    approval: &ApprovalModel,
) -> Result<WeightMarkovChain, MarkovError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(MarkovError::InvalidParameters(format!(
            "arrival rate must be non-negative, got {lambda}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(MarkovError::InvalidParameters(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if w_star < 1 {
        return Err(MarkovError::InvalidParameters(
            "confirmation threshold must be at least 1".into(),
        ));
    }
    approval
        .validate(w_star)
        .map_err(MarkovError::InvalidParameters)?;

    let n = (w_star + 1) as usize;
    let finality = n - 1;
    let mu = lambda * dt;
    let mut matrix = vec![vec![0.0f64; n]; n];

    for w in 0..w_star.saturating_sub(1) {
        let row = &mut matrix[w as usize];
        let max_gain = (w_star - 2 - w) as usize;
        let gains = gain_probabilities(mu, approval.q(w), max_gain);
        let mut assigned = 0.0;
        for (k, &p) in gains.iter().enumerate() {
            row[w as usize + k] = p;
            assigned += p;
        }
        row[finality] = (1.0 - assigned).max(0.0);
    }
    // The merged threshold level and finality itself.
    matrix[finality - 1][finality] = 1.0;
    matrix[finality][finality] = 1.0;

    Ok(WeightMarkovChain {
        w_star,
        arrival_rate: lambda,
        time_step: dt,
        matrix,
    })
}

/// Row `start_state` of the n-step transition matrix.
pub fn n_step_distribution(chain: &WeightMarkovChain, n: usize, start_state: usize) -> Vec<f64> {
    let states = chain.states();
    assert!(start_state < states, "start state out of range");
    let mut dist = vec![0.0f64; states];
    dist[start_state] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0f64; states];
        for (i, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &t) in chain.row(i).iter().enumerate() {
                if t > 0.0 {
                    next[j] += p * t;
                }
            }
        }
        dist = next;
    }
    dist
}

/// Expected seconds until absorption, from the fundamental-matrix identity
/// `(I - Q) t = 1`. Weight never decreases, so `I - Q` is upper triangular
/// and back-substitution solves it directly. Returns infinity when the
/// finality state is unreachable (zero arrivals or zero approval
/// probability), never an error.
pub fn expected_confirmation_delay(chain: &WeightMarkovChain, start_state: usize) -> f64 {
    let transient = chain.w_star.saturating_sub(1) as usize;
    if start_state >= transient {
        return 0.0;
    }
    let mut steps = vec![0.0f64; transient];
    for w in (start_state..transient).rev() {
        let row = chain.row(w);
        let stay = row[w];
        let escape = 1.0 - stay;
        if escape <= f64::EPSILON {
            steps[w] = f64::INFINITY;
            continue;
        }
        let mut acc = 1.0;
        for (j, &p) in row.iter().enumerate().skip(w + 1).take(transient - w - 1) {
            if p > 0.0 {
                acc += p * steps[j];
            }
        }
        steps[w] = acc / escape;
    }
    chain.time_step * steps[start_state]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rows_stochastic(chain: &WeightMarkovChain, tol: f64) {
        for i in 0..chain.states() {
            let sum: f64 = chain.row(i).iter().sum();
            assert!((sum - 1.0).abs() < tol, "row {i} sums to {sum}");
            for &p in chain.row(i) {
                assert!((-tol..=1.0 + tol).contains(&p));
            }
        }
    }

    #[test]
    fn zero_rate_freezes_transient_states() {
        let chain = build_transition_matrix(0.0, 1.0, 6, &ApprovalModel::ConstantQ(0.5)).unwrap();
        for w in 0..5 {
            assert_eq!(chain.probability(w, w), 1.0, "state {w} should not move");
        }
        assert_rows_stochastic(&chain, 1e-12);
    }

    #[test]
    fn certain_approval_gives_pure_poisson_increments() {
        // q = 1, lambda*dt = 1: P[w][w+k] = e^{-1} / k!.
        let chain = build_transition_matrix(1.0, 1.0, 40, &ApprovalModel::ConstantQ(1.0)).unwrap();
        let e_inv = (-1.0f64).exp();
        let mut factorial = 1.0;
        for k in 0..6usize {
            if k > 0 {
                factorial *= k as f64;
            }
            let expected = e_inv / factorial;
            assert!(
                (chain.probability(3, 3 + k) - expected).abs() < 1e-12,
                "k={k}"
            );
        }
        assert_rows_stochastic(&chain, 1e-12);
    }

    #[test]
    fn generating_function_anchor_for_stay_probability() {
        // lambda*dt = 2, q = 0.5: P[0][0] = e^{-2} * e^{1} = e^{-1}.
        let chain = build_transition_matrix(2.0, 1.0, 3, &ApprovalModel::ConstantQ(0.5)).unwrap();
        assert!((chain.probability(0, 0) - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn summation_matches_poisson_thinning_identity() {
        // Independent oracle: k approvals out of Poisson(mu) arrivals thinned
        // by q is Poisson(mu * q).
        for &(mu, q) in &[(0.5, 0.3), (1.0, 0.7), (2.0, 0.5), (4.0, 0.9)] {
            let chain =
                build_transition_matrix(mu, 1.0, 30, &ApprovalModel::ConstantQ(q)).unwrap();
            let thinned = poisson_pmf(mu * q, 12);
            for k in 0..=10usize {
                assert!(
                    (chain.probability(5, 5 + k) - thinned[k]).abs() < 1e-12,
                    "mu={mu} q={q} k={k}"
                );
            }
        }
    }

    #[test]
    fn n_step_base_cases() {
        let chain = build_transition_matrix(1.0, 1.0, 8, &ApprovalModel::ConstantQ(0.4)).unwrap();
        let zero = n_step_distribution(&chain, 0, 2);
        assert_eq!(zero[2], 1.0);
        assert_eq!(zero.iter().sum::<f64>(), 1.0);
        let one = n_step_distribution(&chain, 1, 2);
        for j in 0..chain.states() {
            assert!((one[j] - chain.probability(2, j)).abs() < 1e-15);
        }
    }

    #[test]
    fn n_step_rows_stay_stochastic_and_finality_mass_grows() {
        let chain = build_transition_matrix(1.5, 1.0, 12, &ApprovalModel::ConstantQ(0.6)).unwrap();
        let finality = chain.finality_state();
        let mut last_mass = 0.0;
        for n in 0..60 {
            let dist = n_step_distribution(&chain, n, 0);
            let sum: f64 = dist.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "n={n} sum={sum}");
            assert!(dist[finality] + 1e-12 >= last_mass, "n={n}");
            last_mass = dist[finality];
        }
    }

    #[test]
    fn threshold_one_is_already_final() {
        let chain = build_transition_matrix(1.0, 1.0, 1, &ApprovalModel::ConstantQ(1.0)).unwrap();
        assert_eq!(expected_confirmation_delay(&chain, 0), 0.0);
    }

    #[test]
    fn geometric_closed_form_anchor() {
        // q = 1, lambda*dt = 1, w_star = 2: expected steps 1/(1 - e^{-1}).
        let chain = build_transition_matrix(1.0, 1.0, 2, &ApprovalModel::ConstantQ(1.0)).unwrap();
        let delay = expected_confirmation_delay(&chain, 0);
        let expected = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((delay - expected).abs() < 1e-3, "delay {delay}");
        assert!((delay - 1.582).abs() < 1e-3);

        let half_step =
            build_transition_matrix(1.0, 0.5, 2, &ApprovalModel::ConstantQ(1.0)).unwrap();
        let scaled = expected_confirmation_delay(&half_step, 0);
        assert!((scaled - 0.5 / (1.0 - (-0.5f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn halving_lambda_strictly_increases_delay() {
        let full = build_transition_matrix(2.0, 1.0, 15, &ApprovalModel::ConstantQ(0.5)).unwrap();
        let half = build_transition_matrix(1.0, 1.0, 15, &ApprovalModel::ConstantQ(0.5)).unwrap();
        assert!(
            expected_confirmation_delay(&half, 0) > expected_confirmation_delay(&full, 0)
        );
    }

    #[test]
    fn delay_is_non_increasing_in_lambda() {
        let mut last = f64::INFINITY;
        for &lambda in &[0.1, 0.5, 1.0, 5.0, 20.0] {
            let chain =
                build_transition_matrix(lambda, 1.0, 10, &ApprovalModel::ConstantQ(0.4)).unwrap();
            let delay = expected_confirmation_delay(&chain, 0);
            assert!(delay <= last, "lambda={lambda}");
            last = delay;
        }
    }

    #[test]
    fn non_absorbing_chains_report_infinite_delay() {
        let frozen = build_transition_matrix(0.0, 1.0, 5, &ApprovalModel::ConstantQ(0.5)).unwrap();
        assert!(expected_confirmation_delay(&frozen, 0).is_infinite());
        let blind = build_transition_matrix(2.0, 1.0, 5, &ApprovalModel::ConstantQ(0.0)).unwrap();
        assert!(expected_confirmation_delay(&blind, 0).is_infinite());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(build_transition_matrix(-1.0, 1.0, 5, &ApprovalModel::ConstantQ(0.5)).is_err());
        assert!(build_transition_matrix(1.0, 0.0, 5, &ApprovalModel::ConstantQ(0.5)).is_err());
        assert!(build_transition_matrix(1.0, 1.0, 0, &ApprovalModel::ConstantQ(0.5)).is_err());
        assert!(build_transition_matrix(1.0, 1.0, 5, &ApprovalModel::ConstantQ(1.1)).is_err());
    }

    #[test]
    fn two_phase_low_state_moves_slower() {
        let two_phase = ApprovalModel::two_phase(5, 0.1);
        let chain = build_transition_matrix(1.0, 1.0, 20, &two_phase).unwrap();
        // Below the adaptation weight the chain leaks less mass forward.
        assert!(chain.probability(0, 0) > chain.probability(6, 6));
        assert_rows_stochastic(&chain, 1e-12);
    }

    #[test]
    fn matrix_export_has_header_and_square_body() {
        let chain = build_transition_matrix(1.0, 0.5, 4, &ApprovalModel::ConstantQ(0.5)).unwrap();
        let mut buf = Vec::new();
        chain.export_matrix(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# states=5 lambda=1 dt=0.5");
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), 5);
        for line in body {
            assert_eq!(line.split(',').count(), 5);
        }
    }
}
