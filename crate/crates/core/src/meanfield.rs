//! Mean-field intensity dynamics, stability diagnostics, and decay bounds.
//!
//! Averaging the conditional intensity over realizations gives the linear ODE
//!
//! ```text
//! d/dt mean(t) = (A - beta I) mean(t) + beta mu,      mean(0) = mu
//! ```
//!
//! whose fixed point `lambda* = (I - A/beta)^{-1} mu` exists precisely when
//! the branching ratio `rho(A)/beta` is below one. This module computes that
//! spectral radius (power iteration with a positive shift so the dominant
//! root is strictly separated), solves for the fixed point with conditioning
//! guards, integrates the ODE with a classical fixed-step RK4 scheme that
//! lands exactly on regime switches, and checks the exponential convergence
//! bound `|mean(t) - lambda*| <= |mean(tau_k) - lambda*| exp(-kappa (t - tau_k))`
//! with `kappa = safety * beta * (1 - rho)` on every grid point.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, SquareMatrix};
use crate::pair::GroupPair;
use crate::params::{HawkesParams, RegimeSchedule};
use crate::scalar::Scalar;

/// Relative tolerance for the power-iteration Rayleigh quotient.
const SPECTRAL_REL_TOL: f64 = 1e-10;
/// Iteration cap for the power iteration.
const SPECTRAL_MAX_ITER: usize = 10_000;
/// Consecutive satisfactions required before the quotient is trusted.
const SPECTRAL_STREAK: usize = 3;
/// Width of the critical band around branching ratio one.
const CRITICAL_TOL: f64 = 1e-9;
/// Conditioning limit beyond which the stationary solve is refused.
const CONDITION_LIMIT: f64 = 1e12;
/// Default integrator ceiling on the time step.
const DEFAULT_MAX_STEP: f64 = 0.01;
/// Default number of steps per kernel relaxation time `1/beta`.
const STEPS_PER_RELAXATION: f64 = 10.0;
/// Slack when judging bound margins, absorbing grid-level roundoff.
const MARGIN_SLACK: f64 = 1e-9;

/// Errors from stability analysis and mean-field integration.
#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    /// The power iteration failed to settle within its iteration cap.
    #[error("spectral radius estimate did not converge")]
    NoConvergence,
    /// Branching ratio within the critical band; no usable fixed point.
    #[error("branching ratio {rho} is numerically critical")]
    Critical { rho: f64 },
    /// Branching ratio at or above one; the fixed point does not exist.
    #[error("branching ratio {rho} >= 1: process is non-stationary")]
    NonStationary { rho: f64 },
    /// The stationary system is too ill-conditioned to solve reliably.
    #[error("stationary solve refused: 1-norm condition estimate {cond:.3e} exceeds limit")]
    IllConditioned { cond: f64 },
    /// Vector/matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Integration horizon must be finite and strictly positive.
    #[error("horizon must be finite and > 0")]
    BadHorizon,
    /// Step override must be finite and strictly positive.
    #[error("step size must be finite and > 0")]
    BadStep,
    /// Schedule switches past the horizon leave an empty final regime.
    #[error("schedule breakpoint {breakpoint} lies beyond horizon {horizon}")]
    ScheduleBeyondHorizon { breakpoint: f64, horizon: f64 },
    /// Schedule matrices sized for a different pair count.
    #[error("schedule dimension {schedule} does not match parameter dimension {params}")]
    ScheduleDimension { schedule: usize, params: usize },
    /// Underlying linear-algebra failure.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Stability classification by branching ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityRegime {
    /// `rho < 1`: stationary fixed point exists.
    Subcritical,
    /// `|rho - 1|` inside the critical band: diagnostics only.
    Critical,
    /// `rho > 1`: intensities grow without bound.
    Supercritical,
}

/// Stability diagnostics for one parameterization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport<F> {
    /// Branching ratio `rho(A) / beta`.
    pub rho: F,
    /// Classification of `rho` against the critical band.
    pub regime: StabilityRegime,
    /// Guaranteed mean-field decay rate `beta (1 - rho)` when subcritical.
    pub kappa_bound: Option<F>,
    /// Stationary intensities when subcritical and well-conditioned.
    pub stationary: Option<Vec<F>>,
    /// 1-norm condition estimate of `I - A/beta` when it was computable.
    pub condition_number: Option<F>,
}

/// Spectral radius of an entrywise-nonnegative square matrix.
///
/// Diagonal matrices short-circuit to the exact maximum. Otherwise a power
/// iteration runs on `M + I`: for nonnegative `M` the shift makes the root
/// `rho(M) + 1` strictly dominant in magnitude, so the Rayleigh quotient
/// converges even when other eigenvalues tie `rho(M)` in modulus. If the
/// quotient never stabilizes — a defective dominant eigenvalue, e.g. a
/// strictly triangular influence chain, makes it converge only polynomially
/// — the norm-root fallback below settles the value deterministically.
///
/// # Errors
///
/// [`MeanFieldError::NoConvergence`] if no route produces a finite value.
pub fn spectral_radius<F: Scalar>(matrix: &SquareMatrix<F>) -> Result<F, MeanFieldError> {
    if matrix.is_diagonal() {
        let mut best = F::zero();
        for idx in 0..matrix.n() {
            best = best.max(matrix.get(idx, idx).abs());
        }
        return Ok(best);
    }
    let n = matrix.n();
    // Deterministic restart seeds: uniform first, then a skewed profile in
    // case the uniform vector is (numerically) orthogonal to the root space.
    for attempt in 0..2 {
        let mut v: Vec<F> = (0..n)
            .map(|idx| {
                if attempt == 0 {
                    F::one()
                } else {
                    F::one() + F::lit(idx as f64 + 1.0) / F::lit(n as f64)
                }
            })
            .collect();
        normalize(&mut v);
        let mut prev_quotient = F::nan();
        let mut streak = 0usize;
        for _ in 0..SPECTRAL_MAX_ITER {
            let mut w = matrix.matvec(&v);
            for (w_i, &v_i) in w.iter_mut().zip(&v) {
                *w_i += v_i;
            }
            // Rayleigh quotient of the shifted matrix at unit v.
            let quotient: F = w.iter().zip(&v).map(|(&w_i, &v_i)| w_i * v_i).sum();
            let scale = quotient.abs().max(F::one());
            if (quotient - prev_quotient).abs() <= F::lit(SPECTRAL_REL_TOL) * scale {
                streak += 1;
                if streak >= SPECTRAL_STREAK {
                    return Ok((quotient - F::one()).max(F::zero()));
                }
            } else {
                streak = 0;
            }
            prev_quotient = quotient;
            let norm: F = w.iter().map(|&x| x * x).sum::<F>().sqrt();
            if norm == F::zero() {
                return Ok(F::zero());
            }
            for w_i in &mut w {
                *w_i /= norm;
            }
            v = w;
        }
    }
    let rho = gelfand_radius(matrix);
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(MeanFieldError::NoConvergence)
    }
}

/// Spectral radius via the norm-root limit `lim ||A^k||^{1/k}` with `k = 2^48`,
/// evaluated by repeated squaring of a normalized power of the matrix.
///
/// This handles the case the power iteration cannot: a defective dominant
/// eigenvalue (the Rayleigh quotient then converges only like `1/k`). The
/// squaring route is immune because it never looks at eigenvectors. Scale is
/// carried in log space so the entries of the working matrix stay near 1;
/// nilpotent matrices annihilate exactly and report a radius of zero. The
/// finite `k` leaves a relative bias of order `ln(k)/k`, far below the
/// tolerances used anywhere in this module.
fn gelfand_radius<F: Scalar>(matrix: &SquareMatrix<F>) -> F {
    const SQUARINGS: u32 = 48;
    // Invariant: A^(2^j) = b * exp(log_scale), with b kept at unit 1-norm so
    // repeated squaring neither overflows nor underflows.
    let mut b = matrix.clone();
    let mut log_scale = F::zero();
    for _ in 0..SQUARINGS {
        let s = b.norm_one();
        if s == F::zero() {
            return F::zero();
        }
        log_scale = F::lit(2.0) * (log_scale + s.ln());
        let unit = b.scaled(F::one() / s);
        b = unit.matmul(&unit);
    }
    let s = b.norm_one();
    if s == F::zero() {
        return F::zero();
    }
    ((s.ln() + log_scale) / F::lit(2f64.powi(SQUARINGS as i32)))
        .exp()
        .max(F::zero())
}

fn normalize<F: Scalar>(v: &mut [F]) {
    let norm: F = v.iter().map(|&x| x * x).sum::<F>().sqrt();
    if norm > F::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Branching ratio `rho(A) / beta` for an excitation matrix.
pub fn branching_ratio<F: Scalar>(
    excitation: &SquareMatrix<F>,
    beta: F,
) -> Result<F, MeanFieldError> {
    Ok(spectral_radius(excitation)? / beta)
}

/// Stationary mean intensities `(I - A/beta)^{-1} mu`.
///
/// # Errors
///
/// Refuses critical, non-stationary, and ill-conditioned systems instead of
/// returning meaningless numbers.
pub fn stationary_intensity<F: Scalar>(
    mu: &[F],
    excitation: &SquareMatrix<F>,
    beta: F,
) -> Result<Vec<F>, MeanFieldError> {
    let n = excitation.n();
    if mu.len() != n {
        return Err(MeanFieldError::DimensionMismatch {
            expected: n,
            got: mu.len(),
        });
    }
    let rho = branching_ratio(excitation, beta)?;
    if (rho - F::one()).abs() <= F::lit(CRITICAL_TOL) {
        return Err(MeanFieldError::Critical { rho: rho.as_f64() });
    }
    if rho >= F::one() {
        return Err(MeanFieldError::NonStationary { rho: rho.as_f64() });
    }
    let system = stationary_system(excitation, beta);
    let cond = match system.condition_one() {
        Ok(c) => c,
        Err(LinalgError::Singular) => {
            return Err(MeanFieldError::IllConditioned {
                cond: f64::INFINITY,
            })
        }
        Err(other) => return Err(other.into()),
    };
    if cond > F::lit(CONDITION_LIMIT) {
        return Err(MeanFieldError::IllConditioned {
            cond: cond.as_f64(),
        });
    }
    Ok(system.solve(mu)?)
}

/// Builds `I - A/beta`.
fn stationary_system<F: Scalar>(excitation: &SquareMatrix<F>, beta: F) -> SquareMatrix<F> {
    let n = excitation.n();
    let mut system = SquareMatrix::identity(n);
    for row in 0..n {
        for col in 0..n {
            let val = system.get(row, col) - excitation.get(row, col) / beta;
            system.set(row, col, val);
        }
    }
    system
}

/// Full stability diagnostics for one `(mu, A, beta)` triple.
///
/// Unlike [`stationary_intensity`] this does not treat instability as an
/// error: the regime is reported and unavailable quantities stay `None`.
///
/// # Errors
///
/// Only genuine computational failures (spectral non-convergence, dimension
/// mismatches) surface as errors.
pub fn stability_report<F: Scalar>(
    mu: &[F],
    excitation: &SquareMatrix<F>,
    beta: F,
) -> Result<StabilityReport<F>, MeanFieldError> {
    let n = excitation.n();
    if mu.len() != n {
        return Err(MeanFieldError::DimensionMismatch {
            expected: n,
            got: mu.len(),
        });
    }
    let rho = branching_ratio(excitation, beta)?;
    let regime = if (rho - F::one()).abs() <= F::lit(CRITICAL_TOL) {
        StabilityRegime::Critical
    } else if rho > F::one() {
        StabilityRegime::Supercritical
    } else {
        StabilityRegime::Subcritical
    };
    let kappa_bound = match regime {
        StabilityRegime::Subcritical => Some(beta * (F::one() - rho)),
        _ => None,
    };
    let (stationary, condition_number) = if regime == StabilityRegime::Subcritical {
        let system = stationary_system(excitation, beta);
        match system.condition_one() {
            Ok(cond) if cond <= F::lit(CONDITION_LIMIT) => (Some(system.solve(mu)?), Some(cond)),
            Ok(cond) => (None, Some(cond)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        rho,
        regime,
        kappa_bound,
        stationary,
        condition_number,
    })
}

/// Deterministic mean-intensity trajectory on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldTrajectory<F> {
    k_groups: usize,
    beta: F,
    mu: Vec<F>,
    /// Effective regime boundaries, always starting at 0.
    breakpoints: Vec<F>,
    /// One excitation matrix per regime interval.
    matrices: Vec<SquareMatrix<F>>,
    times: Vec<F>,
    /// One intensity vector (flat pair order) per grid time.
    values: Vec<Vec<F>>,
}

impl<F: Scalar> MeanFieldTrajectory<F> {
    /// Grid times, strictly increasing, containing every regime boundary.
    pub fn times(&self) -> &[F] {
        &self.times
    }

    /// Intensity vectors aligned with [`Self::times`].
    pub fn values(&self) -> &[Vec<F>] {
        &self.values
    }

    /// Number of groups behind the flat pair axis.
    pub fn k_groups(&self) -> usize {
        self.k_groups
    }

    /// Decay rate the trajectory was integrated with.
    pub fn beta(&self) -> F {
        self.beta
    }

    /// Baseline vector the trajectory was integrated with.
    pub fn mu(&self) -> &[F] {
        &self.mu
    }

    /// Regime boundaries (first entry 0).
    pub fn breakpoints(&self) -> &[F] {
        &self.breakpoints
    }

    /// Per-regime excitation matrices.
    pub fn matrices(&self) -> &[SquareMatrix<F>] {
        &self.matrices
    }

    /// Final intensity vector.
    pub fn terminal(&self) -> &[F] {
        self.values
            .last()
            .expect("trajectory always holds the initial point")
    }

    /// Renders the trajectory as CSV with one labeled column per pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for pair in GroupPair::all(self.k_groups) {
            out.push_str(&format!(",lambda_{}", pair.label()));
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Integrates the mean-field ODE with classical RK4.
///
/// The step defaults to `min(0.01, 0.1/beta)` and is shrunk per interval so
/// an integer number of steps lands exactly on each regime boundary and the
/// horizon.
///
/// # Errors
///
/// Rejects bad horizons/steps and schedules that do not fit the parameters.
pub fn integrate_meanfield<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    horizon: F,
    step_override: Option<F>,
) -> Result<MeanFieldTrajectory<F>, MeanFieldError> {
    if !horizon.is_finite() || horizon <= F::zero() {
        return Err(MeanFieldError::BadHorizon);
    }
    let g = params.n_pairs();
    if let Some(s) = schedule {
        if s.dimension() != g {
            return Err(MeanFieldError::ScheduleDimension {
                schedule: s.dimension(),
                params: g,
            });
        }
        if s.last_breakpoint() > horizon {
            return Err(MeanFieldError::ScheduleBeyondHorizon {
                breakpoint: s.last_breakpoint().as_f64(),
                horizon: horizon.as_f64(),
            });
        }
    }
    let beta = params.beta();
    let max_step = match step_override {
        Some(h) if h.is_finite() && h > F::zero() => h,
        Some(_) => return Err(MeanFieldError::BadStep),
        None => F::lit(DEFAULT_MAX_STEP).min(F::lit(1.0 / STEPS_PER_RELAXATION) / beta),
    };

    let (breakpoints, matrices): (Vec<F>, Vec<SquareMatrix<F>>) = match schedule {
        Some(s) => (s.breakpoints().to_vec(), s.matrices().to_vec()),
        None => (vec![F::zero()], vec![params.excitation().clone()]),
    };

    let mu = params.mu().to_vec();
    let mut times = vec![F::zero()];
    let mut values = vec![mu.clone()];
    let mut state = mu.clone();

    for (idx, matrix) in matrices.iter().enumerate() {
        let start = breakpoints[idx];
        let end = if idx + 1 < breakpoints.len() {
            breakpoints[idx + 1]
        } else {
            horizon
        };
        if end <= start {
            continue;
        }
        let len = end - start;
        let n_steps = (len / max_step).ceil().as_f64().max(1.0) as usize;
        let h = len / F::lit(n_steps as f64);
        for step_idx in 0..n_steps {
            rk4_step(&mut state, matrix, beta, &mu, h);
            // Recompute the time from the interval anchor so accumulated
            // roundoff cannot drift the grid off the boundary.
            let t = if step_idx + 1 == n_steps {
                end
            } else {
                start + h * F::lit((step_idx + 1) as f64)
            };
            times.push(t);
            values.push(state.clone());
        }
    }

    Ok(MeanFieldTrajectory {
        k_groups: params.k_groups(),
        beta,
        mu,
        breakpoints,
        matrices,
        times,
        values,
    })
}

/// Right-hand side `A x - beta x + beta mu` written into `out`.
fn meanfield_rhs<F: Scalar>(
    matrix: &SquareMatrix<F>,
    beta: F,
    mu: &[F],
    x: &[F],
    out: &mut Vec<F>,
) {
    *out = matrix.matvec(x);
    for ((o, &x_i), &mu_i) in out.iter_mut().zip(x).zip(mu) {
        *o += beta * (mu_i - x_i);
    }
}

/// One classical RK4 step in place.
fn rk4_step<F: Scalar>(state: &mut [F], matrix: &SquareMatrix<F>, beta: F, mu: &[F], h: F) {
    let n = state.len();
    let half = F::lit(0.5);
    let sixth = F::lit(1.0 / 6.0);
    let two = F::lit(2.0);

    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    let mut k3 = Vec::new();
    let mut k4 = Vec::new();
    let mut probe = vec![F::zero(); n];

    meanfield_rhs(matrix, beta, mu, state, &mut k1);
    for i in 0..n {
        probe[i] = state[i] + half * h * k1[i];
    }
    meanfield_rhs(matrix, beta, mu, &probe, &mut k2);
    for i in 0..n {
        probe[i] = state[i] + half * h * k2[i];
    }
    meanfield_rhs(matrix, beta, mu, &probe, &mut k3);
    for i in 0..n {
        probe[i] = state[i] + h * k3[i];
    }
    meanfield_rhs(matrix, beta, mu, &probe, &mut k4);
    for i in 0..n {
        state[i] += h * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
}

/// One grid point's distance-versus-bound record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginRow<F> {
    /// Grid time.
    pub t: F,
    /// Regime interval the point was checked against.
    pub interval: usize,
    /// Euclidean distance to the interval's fixed point.
    pub distance: F,
    /// Distance normalized by the interval's initial distance.
    pub ratio: F,
    /// Permitted normalized distance `exp(-kappa (t - tau_k))`.
    pub bound: F,
    /// `bound - ratio`; negative values (beyond slack) violate the bound.
    pub margin: F,
}

/// Verdict for one regime interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalBound<F> {
    /// Interval index within the schedule.
    pub interval: usize,
    /// Interval start time.
    pub start: F,
    /// Interval end time.
    pub end: F,
    /// Branching ratio of the interval's matrix.
    pub rho: F,
    /// Decay rate `safety * beta * (1 - rho)`; `None` when not subcritical.
    pub kappa: Option<F>,
    /// Distance to the fixed point at the interval start.
    pub initial_distance: F,
    /// Worst (smallest) margin over the interval's grid points.
    pub worst_margin: F,
    /// Largest observed `ratio / bound`; an empirical decay constant.
    pub empirical_c: F,
    /// Whether every grid point respected the bound.
    pub pass: bool,
}

/// Full bound verification across a trajectory's regime intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundVerification<F> {
    /// Safety factor applied to the theoretical decay rate.
    pub safety: F,
    /// Per-interval verdicts.
    pub intervals: Vec<IntervalBound<F>>,
    /// Per-grid-point records (concatenated across intervals).
    pub rows: Vec<MarginRow<F>>,
    /// Conjunction of the interval verdicts.
    pub pass: bool,
}

impl<F: Scalar> BoundVerification<F> {
    /// Renders the per-point records as CSV.
    pub fn margins_csv(&self) -> String {
        let mut out = String::from("t,interval,distance,ratio,bound,margin\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.t, row.interval, row.distance, row.ratio, row.bound, row.margin
            ));
        }
        out
    }
}

/// Euclidean distance between a state vector and a target.
fn distance<F: Scalar>(state: &[F], target: &[F]) -> F {
    state
        .iter()
        .zip(target)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<F>()
        .sqrt()
}

/// Checks the normalized exponential bound on one interval's grid slice.
///
/// `times` and `values` must be aligned; the first entry anchors the bound.
/// Returns the per-point records plus `(worst_margin, empirical_c)`.
pub fn interval_margin_rows<F: Scalar>(
    times: &[F],
    values: &[Vec<F>],
    target: &[F],
    kappa: F,
    interval: usize,
) -> (Vec<MarginRow<F>>, F, F) {
    let anchor_t = times[0];
    let d0 = distance(&values[0], target);
    let mut rows = Vec::with_capacity(times.len());
    let mut worst = F::infinity();
    let mut emp_c = F::zero();
    // A start already at the fixed point makes the normalized bound vacuous.
    let vacuous = d0 <= F::lit(1e-12) * (F::one() + norm(target));
    for (&t, value) in times.iter().zip(values) {
        let d = distance(value, target);
        let bound = (-kappa * (t - anchor_t)).exp();
        let ratio = if vacuous { F::zero() } else { d / d0 };
        let margin = bound - ratio;
        worst = worst.min(margin);
        if bound > F::zero() {
            emp_c = emp_c.max(ratio / bound);
        }
        rows.push(MarginRow {
            t,
            interval,
            distance: d,
            ratio,
            bound,
            margin,
        });
    }
    (rows, worst, emp_c)
}

fn norm<F: Scalar>(v: &[F]) -> F {
    v.iter().map(|&x| x * x).sum::<F>().sqrt()
}

/// Verifies the per-regime exponential convergence bound on a trajectory.
///
/// Each interval `[tau_k, tau_{k+1}]` is checked against its own fixed point
/// with decay rate `kappa_k = safety * beta * (1 - rho_k)`. Intervals whose
/// matrix is not subcritical cannot satisfy a decay bound and fail outright.
///
/// # Errors
///
/// Propagates spectral/solve failures for interval matrices.
pub fn verify_convergence_bound<F: Scalar>(
    traj: &MeanFieldTrajectory<F>,
    safety: F,
) -> Result<BoundVerification<F>, MeanFieldError> {
    let beta = traj.beta;
    let horizon = *traj.times.last().expect("trajectory is never empty");
    let mut intervals = Vec::with_capacity(traj.matrices.len());
    let mut rows = Vec::new();
    let mut all_pass = true;

    for (idx, matrix) in traj.matrices.iter().enumerate() {
        let start = traj.breakpoints[idx];
        let end = if idx + 1 < traj.breakpoints.len() {
            traj.breakpoints[idx + 1]
        } else {
            horizon
        };
        // Grid indices covering [start, end]; boundaries are exact grid points.
        let lo = traj.times.iter().position(|&t| t >= start).unwrap_or(0);
        let hi = traj
            .times
            .iter()
            .rposition(|&t| t <= end)
            .map(|i| i + 1)
            .unwrap_or(traj.times.len());
        let times = &traj.times[lo..hi];
        let values = &traj.values[lo..hi];

        let rho = branching_ratio(matrix, beta)?;
        if rho >= F::one() - F::lit(CRITICAL_TOL) {
            all_pass = false;
            intervals.push(IntervalBound {
                interval: idx,
                start,
                end,
                rho,
                kappa: None,
                initial_distance: F::nan(),
                worst_margin: F::neg_infinity(),
                empirical_c: F::infinity(),
                pass: false,
            });
            continue;
        }
        let target = stationary_intensity(&traj.mu, matrix, beta)?;
        let kappa = safety * beta * (F::one() - rho);
        let (mut interval_rows, worst, emp_c) =
            interval_margin_rows(times, values, &target, kappa, idx);
        let d0 = distance(&values[0], &target);
        let pass = worst >= -F::lit(MARGIN_SLACK);
        all_pass &= pass;
        intervals.push(IntervalBound {
            interval: idx,
            start,
            end,
            rho,
            kappa: Some(kappa),
            initial_distance: d0,
            worst_margin: worst,
            empirical_c: emp_c,
            pass,
        });
        rows.append(&mut interval_rows);
    }

    Ok(BoundVerification {
        safety,
        intervals,
        rows,
        pass: all_pass,
    })
}
