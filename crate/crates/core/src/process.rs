//! Point-process dynamics: intensity evaluation and exact simulation.
//!
//! For parameters `(mu, alpha, beta)` and an event history, the conditional
//! intensity of pair `p` at time `t` is
//!
//! ```text
//! lambda_p(t) = mu_p + sum_q alpha[p][q] * sum_{s < t, mark(s) = q} exp(-beta (t - s))
//! ```
//!
//! Because all kernels share one decay rate, the inner sums collapse to one
//! running load per source pair, updated multiplicatively between events
//! ([`ExcitationState`]). [`intensity_at`] instead evaluates the definition
//! directly from the full history; the two routes agree to rounding and the
//! test suite holds them against each other.
//!
//! Simulation uses Ogata-style thinning: between events every intensity is
//! nonincreasing, so the total intensity evaluated just after the most recent
//! event (or regime switch, or rejected candidate) dominates the interval
//! ahead, and candidates drawn at that rate are accepted with probability
//! `total(cand) / bound`. The dominating rate is refreshed at every regime
//! breakpoint because a matrix switch may lift the intensity.

use core::cmp::Ordering;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::events::{Event, EventLog, EventLogError};
use crate::linalg::SquareMatrix;
use crate::pair::GroupPair;
use crate::params::{HawkesParams, RegimeMode, RegimeSchedule};
use crate::scalar::Scalar;

/// Errors from intensity evaluation or simulation.
#[derive(Debug, Error)]
pub enum ProcessError {
    /// Parameters and log disagree on the group count.
    #[error("parameters use {params} groups but the log uses {log}")]
    GroupCountMismatch { params: usize, log: usize },
    /// Schedule matrices do not match the pair count.
    #[error("schedule matrices are {got} x {got}, expected {expected} x {expected}")]
    ScheduleDimension { expected: usize, got: usize },
    /// A schedule breakpoint lies beyond the simulation horizon.
    #[error("last breakpoint {last} exceeds horizon {horizon}")]
    ScheduleBeyondHorizon { last: f64, horizon: f64 },
    /// Horizon must be finite and strictly positive.
    #[error("horizon must be finite and > 0")]
    BadHorizon,
    /// Query time must be finite.
    #[error("query time must be finite")]
    BadQueryTime,
    /// Evaluation grid times must be nondecreasing.
    #[error("grid times must be nondecreasing (violated at index {index})")]
    GridNotSorted { index: usize },
    /// The simulated event sequence failed log validation (e.g. two events in
    /// one stream rounded to the same float time under an extreme intensity).
    #[error("simulated events failed log validation")]
    Log(#[from] EventLogError),
}

fn check_dimensions<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
) -> Result<(), ProcessError> {
    if let Some(s) = schedule {
        if s.dimension() != params.n_pairs() {
            return Err(ProcessError::ScheduleDimension {
                expected: params.n_pairs(),
                got: s.dimension(),
            });
        }
    }
    Ok(())
}

/// Excitation matrix active at time `t` (the base matrix when no schedule is
/// present).
fn matrix_at<'a, F: Scalar>(
    params: &'a HawkesParams<F>,
    schedule: Option<&'a RegimeSchedule<F>>,
    t: F,
) -> &'a SquareMatrix<F> {
    match schedule {
        Some(s) => s.matrix_at(t),
        None => params.excitation(),
    }
}

/// Running excitation loads with the shared exponential decay factored out.
///
/// `source_load[q]` is `sum exp(-beta (now - s))` over past events of source
/// pair `q`; `target_load[p]` is the same sum with each event weighted by the
/// excitation entry of the matrix active when it occurred. Intensities under
/// [`RegimeMode::ReweightHistory`] are `mu + A(now) * source_load`; under
/// [`RegimeMode::FreezeAtEventTime`] they are `mu + target_load`.
#[derive(Debug, Clone)]
pub struct ExcitationState<F> {
    time: F,
    source_load: Vec<F>,
    target_load: Vec<F>,
}

impl<F: Scalar> ExcitationState<F> {
    /// Empty state at time zero for `n_pairs` pairs.
    pub fn new(n_pairs: usize) -> Self {
        Self {
            time: F::zero(),
            source_load: vec![F::zero(); n_pairs],
            target_load: vec![F::zero(); n_pairs],
        }
    }

    /// Time the loads are currently decayed to.
    #[inline]
    pub fn time(&self) -> F {
        self.time
    }

    /// Decays the loads forward to time `t >= self.time()`.
    pub fn advance_to(&mut self, t: F, beta: F) {
        debug_assert!(t >= self.time, "state must advance forward in time");
        if t == self.time {
            return;
        }
        let decay = (-beta * (t - self.time)).exp();
        for load in &mut self.source_load {
            *load *= decay;
        }
        for load in &mut self.target_load {
            *load *= decay;
        }
        self.time = t;
    }

    /// Registers an event of flat source index `source` occurring at the
    /// state's current time, excited under `matrix_at_event`.
    pub fn register_event(&mut self, source: usize, matrix_at_event: &SquareMatrix<F>) {
        self.source_load[source] += F::one();
        for p in 0..self.target_load.len() {
            self.target_load[p] += matrix_at_event.get(p, source);
        }
    }

    /// Per-pair intensities at the state's current time.
    pub fn intensities(&self, mu: &[F], matrix_now: &SquareMatrix<F>, mode: RegimeMode) -> Vec<F> {
        match mode {
            RegimeMode::ReweightHistory => {
                let excited = matrix_now.matvec(&self.source_load);
                mu.iter().zip(excited).map(|(&m, e)| m + e).collect()
            }
            RegimeMode::FreezeAtEventTime => mu
                .iter()
                .zip(&self.target_load)
                .map(|(&m, &e)| m + e)
                .collect(),
        }
    }
}

/// Evaluates the conditional intensity vector at `t` directly from the event
/// history (events strictly before `t` contribute).
///
/// This is the quadratic-cost reference evaluator; use
/// [`intensity_on_grid`] to sweep many query points in one pass.
///
/// # Errors
///
/// See [`ProcessError`].
pub fn intensity_at<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    mode: RegimeMode,
    log: &EventLog<F>,
    t: F,
) -> Result<Vec<F>, ProcessError> {
    check_dimensions(params, schedule)?;
    if log.k_groups() != params.k_groups() {
        return Err(ProcessError::GroupCountMismatch {
            params: params.k_groups(),
            log: log.k_groups(),
        });
    }
    if !t.is_finite() {
        return Err(ProcessError::BadQueryTime);
    }
    let beta = params.beta();
    let mut out: Vec<F> = params.mu().to_vec();
    let now_matrix = matrix_at(params, schedule, t);
    for ev in log.events() {
        if ev.t >= t {
            break;
        }
        let source = ev.mark.flat_index(params.k_groups());
        let decay = (-beta * (t - ev.t)).exp();
        let m = match mode {
            RegimeMode::ReweightHistory => now_matrix,
            RegimeMode::FreezeAtEventTime => matrix_at(params, schedule, ev.t),
        };
        for (p, rate) in out.iter_mut().enumerate() {
            *rate += m.get(p, source) * decay;
        }
    }
    Ok(out)
}

/// Evaluates the intensity vector at each grid time in one forward pass over
/// the log (events strictly before each grid time contribute).
///
/// # Errors
///
/// See [`ProcessError`]; the grid must be nondecreasing.
pub fn intensity_on_grid<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    mode: RegimeMode,
    log: &EventLog<F>,
    times: &[F],
) -> Result<Vec<Vec<F>>, ProcessError> {
    check_dimensions(params, schedule)?;
    if log.k_groups() != params.k_groups() {
        return Err(ProcessError::GroupCountMismatch {
            params: params.k_groups(),
            log: log.k_groups(),
        });
    }
    for (index, w) in times.windows(2).enumerate() {
        // `partial_cmp` makes the NaN case explicit: an unordered comparison
        // rejects the grid entry rather than slipping through a `<` check.
        let ordered = matches!(
            w[1].partial_cmp(&w[0]),
            Some(Ordering::Greater | Ordering::Equal)
        );
        if !ordered {
            return Err(ProcessError::GridNotSorted { index: index + 1 });
        }
    }
    if let Some(&first) = times.first() {
        if !first.is_finite() {
            return Err(ProcessError::BadQueryTime);
        }
    }
    let beta = params.beta();
    let mut state = ExcitationState::new(params.n_pairs());
    let mut next_event = 0usize;
    let events = log.events();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !t.is_finite() {
            return Err(ProcessError::BadQueryTime);
        }
        while next_event < events.len() && events[next_event].t < t {
            let ev = events[next_event];
            if ev.t > state.time() {
                state.advance_to(ev.t, beta);
            }
            state.register_event(
                ev.mark.flat_index(params.k_groups()),
                matrix_at(params, schedule, ev.t),
            );
            next_event += 1;
        }
        // The state may sit slightly behind `t` (at the last event time);
        // decay the remaining gap without consuming events at exactly `t`.
        let mut probe = state.clone();
        if t > probe.time() {
            probe.advance_to(t, beta);
        }
        out.push(probe.intensities(params.mu(), matrix_at(params, schedule, t), mode));
    }
    Ok(out)
}

/// Simulates the process exactly on `[0, horizon)` by thinning.
///
/// The returned log is deterministic in `(params, schedule, mode, horizon,
/// seed)`; the generator is ChaCha8 seeded with `seed`, and all raw draws are
/// made in `f64`. When the cumulative-intensity scan that picks the event mark
/// lands exactly on a boundary between two marks, the lower flat index wins.
///
/// # Errors
///
/// See [`ProcessError`]; schedules whose last breakpoint exceeds the horizon
/// are rejected.
pub fn simulate<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    mode: RegimeMode,
    horizon: F,
    seed: u64,
) -> Result<EventLog<F>, ProcessError> {
    check_dimensions(params, schedule)?;
    if !horizon.is_finite() || horizon <= F::zero() {
        return Err(ProcessError::BadHorizon);
    }
    if let Some(s) = schedule {
        if s.last_breakpoint() > horizon {
            return Err(ProcessError::ScheduleBeyondHorizon {
                last: s.last_breakpoint().as_f64(),
                horizon: horizon.as_f64(),
            });
        }
    }
    let g = params.n_pairs();
    let beta = params.beta();
    let mu = params.mu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = ExcitationState::new(g);
    let mut events: Vec<Event<F>> = Vec::new();
    let mut t = F::zero();

    // Breakpoints strictly inside (0, horizon), in order.
    let interior: Vec<F> = schedule
        .map(|s| {
            s.breakpoints()
                .iter()
                .copied()
                .filter(|&b| b > F::zero() && b < horizon)
                .collect()
        })
        .unwrap_or_default();
    let mut next_break = 0usize;

    let total_at = |state: &ExcitationState<F>, at: F| -> F {
        state
            .intensities(mu, matrix_at(params, schedule, at), mode)
            .into_iter()
            .sum()
    };
    let mut bound = total_at(&state, t);

    loop {
        if bound <= F::zero() {
            // Nothing can fire; skip ahead to the next regime switch, if any.
            match interior.get(next_break) {
                Some(&tau) => {
                    state.advance_to(tau, beta);
                    t = tau;
                    next_break += 1;
                    bound = total_at(&state, t);
                    continue;
                }
                None => break,
            }
        }
        let draw: f64 = rng.random();
        let wait = F::lit(-(1.0 - draw).ln()) / bound;
        let cand = t + wait;
        if let Some(&tau) = interior.get(next_break) {
            if cand >= tau {
                // The dominating rate is only valid up to the switch: move
                // there, adopt the new matrix, and redraw (memorylessness of
                // the dominating process makes discarding the candidate exact).
                state.advance_to(tau, beta);
                t = tau;
                next_break += 1;
                bound = total_at(&state, t);
                continue;
            }
        }
        if cand >= horizon {
            break;
        }
        state.advance_to(cand, beta);
        let lambdas = state.intensities(mu, matrix_at(params, schedule, cand), mode);
        let total: F = lambdas.iter().copied().sum();
        let mark_point = F::lit(rng.random::<f64>()) * bound;
        if mark_point < total {
            let mut acc = F::zero();
            let mut source = g - 1;
            for (p, &lp) in lambdas.iter().enumerate() {
                acc += lp;
                if mark_point < acc {
                    source = p;
                    break;
                }
            }
            state.register_event(source, matrix_at(params, schedule, cand));
            events.push(Event {
                t: cand,
                mark: GroupPair::from_flat_index(source, params.k_groups())
                    .expect("flat index within pair count"),
            });
            t = cand;
            bound = total_at(&state, t);
        } else {
            // Rejected: intensities keep decaying, so their current total
            // dominates the remaining interval.
            t = cand;
            bound = total;
        }
    }
    Ok(EventLog::new(params.k_groups(), horizon, events)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_group_params() -> HawkesParams<f64> {
        // Worked example: single event of mark (1,1) at s = 0, beta = 1.
        let a = SquareMatrix::from_rows(&[
            vec![0.60, 0.00, 0.05],
            vec![0.00, 0.40, 0.05],
            vec![0.10, 0.10, 0.20],
        ])
        .unwrap();
        HawkesParams::new(2, vec![0.8, 0.5, 0.2], a, 1.0).unwrap()
    }

    fn single_event_log() -> EventLog<f64> {
        EventLog::new(
            2,
            10.0,
            vec![Event {
                t: 0.0,
                mark: GroupPair::new(1, 1).unwrap(),
            }],
        )
        .unwrap()
    }

    #[test]
    fn intensity_matches_hand_computed_example() {
        let params = two_group_params();
        let log = single_event_log();
        let lam = intensity_at(&params, None, RegimeMode::ReweightHistory, &log, 1.0).unwrap();
        let decay = (-1.0f64).exp();
        let expect = [0.8 + 0.60 * decay, 0.5 + 0.0, 0.2 + 0.10 * decay];
        for (p, (&got, &want)) in lam.iter().zip(expect.iter()).enumerate() {
            assert!(
                (got - want).abs() < 1e-15,
                "pair {p}: intensity {got} != expected {want}"
            );
        }
    }

    #[test]
    fn events_at_query_time_are_excluded() {
        let params = two_group_params();
        let log = single_event_log();
        let lam = intensity_at(&params, None, RegimeMode::ReweightHistory, &log, 0.0).unwrap();
        assert_eq!(
            lam,
            vec![0.8, 0.5, 0.2],
            "event at t must not contribute at t"
        );
    }

    #[test]
    fn state_recursion_matches_direct_evaluation() {
        let params = two_group_params();
        let log = simulate(&params, None, RegimeMode::ReweightHistory, 50.0, 7).unwrap();
        assert!(log.len() > 20, "expected a nontrivial simulated history");
        let grid: Vec<f64> = (0..200).map(|k| 0.25 * k as f64).collect();
        let swept =
            intensity_on_grid(&params, None, RegimeMode::ReweightHistory, &log, &grid).unwrap();
        for (idx, &t) in grid.iter().enumerate() {
            let direct = intensity_at(&params, None, RegimeMode::ReweightHistory, &log, t).unwrap();
            for p in 0..3 {
                let scale = direct[p].abs().max(1.0);
                assert!(
                    (swept[idx][p] - direct[p]).abs() / scale < 1e-10,
                    "recursion and direct sum disagree at t={t}, pair {p}: {} vs {}",
                    swept[idx][p],
                    direct[p]
                );
            }
        }
    }

    #[test]
    fn freeze_and_reweight_agree_without_a_schedule() {
        let params = two_group_params();
        let log = simulate(&params, None, RegimeMode::ReweightHistory, 30.0, 11).unwrap();
        let a = intensity_at(&params, None, RegimeMode::ReweightHistory, &log, 17.3).unwrap();
        let b = intensity_at(&params, None, RegimeMode::FreezeAtEventTime, &log, 17.3).unwrap();
        for p in 0..3 {
            assert!(
                (a[p] - b[p]).abs() < 1e-12,
                "modes must coincide for constant excitation, pair {p}"
            );
        }
    }

    #[test]
    fn regime_switch_semantics_differ_as_documented() {
        // One event before the switch; after it, the reweighted intensity uses
        // the new matrix on the old event while the frozen one keeps the old
        // weight.
        let params = HawkesParams::diagonal(1, vec![0.1], &[0.5], 1.0).unwrap();
        let sched = RegimeSchedule::diagonal(vec![0.0, 1.0], &[vec![0.5], vec![0.9]]).unwrap();
        let log = EventLog::new(
            1,
            5.0,
            vec![Event {
                t: 0.5,
                mark: GroupPair::new(1, 1).unwrap(),
            }],
        )
        .unwrap();
        let t = 1.5;
        let decay = (-(t - 0.5f64)).exp();
        let rew =
            intensity_at(&params, Some(&sched), RegimeMode::ReweightHistory, &log, t).unwrap();
        let fro = intensity_at(
            &params,
            Some(&sched),
            RegimeMode::FreezeAtEventTime,
            &log,
            t,
        )
        .unwrap();
        assert!(
            (rew[0] - (0.1 + 0.9 * decay)).abs() < 1e-15,
            "reweight must use new matrix"
        );
        assert!(
            (fro[0] - (0.1 + 0.5 * decay)).abs() < 1e-15,
            "freeze must keep old matrix"
        );
    }

    #[test]
    fn simulation_is_deterministic_in_the_seed() {
        let params = two_group_params();
        let a = simulate(&params, None, RegimeMode::ReweightHistory, 40.0, 123).unwrap();
        let b = simulate(&params, None, RegimeMode::ReweightHistory, 40.0, 123).unwrap();
        assert_eq!(
            a.to_jsonl_string(),
            b.to_jsonl_string(),
            "same seed must give byte-identical logs"
        );
        let c = simulate(&params, None, RegimeMode::ReweightHistory, 40.0, 124).unwrap();
        assert_ne!(
            a.to_jsonl_string(),
            c.to_jsonl_string(),
            "different seeds should diverge"
        );
    }

    #[test]
    fn intensities_never_drop_below_baseline() {
        let params = two_group_params();
        let log = simulate(&params, None, RegimeMode::ReweightHistory, 60.0, 5).unwrap();
        let grid: Vec<f64> = (0..120).map(|k| 0.5 * k as f64).collect();
        let lam =
            intensity_on_grid(&params, None, RegimeMode::ReweightHistory, &log, &grid).unwrap();
        for (idx, row) in lam.iter().enumerate() {
            for (p, (&rate, &mu)) in row.iter().zip(params.mu()).enumerate() {
                assert!(
                    rate >= mu,
                    "intensity below baseline at grid index {idx}, pair {p}"
                );
            }
        }
    }

    #[test]
    fn zero_intensity_process_produces_no_events() {
        let params = HawkesParams::diagonal(1, vec![0.0], &[0.5], 1.0).unwrap();
        let log = simulate(&params, None, RegimeMode::ReweightHistory, 100.0, 3).unwrap();
        assert!(
            log.is_empty(),
            "zero baseline and empty history admit no events"
        );
    }

    #[test]
    fn schedule_beyond_horizon_is_rejected() {
        let params = HawkesParams::diagonal(1, vec![0.5], &[0.2], 1.0).unwrap();
        let sched = RegimeSchedule::diagonal(vec![0.0, 50.0], &[vec![0.2], vec![0.4]]).unwrap();
        match simulate(&params, Some(&sched), RegimeMode::ReweightHistory, 40.0, 1) {
            Err(ProcessError::ScheduleBeyondHorizon { .. }) => {}
            other => panic!("expected schedule-beyond-horizon error, got {other:?}"),
        }
    }
}
