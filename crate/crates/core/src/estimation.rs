//! Per-pair maximum-likelihood estimation with exponential kernels.
//!
//! Each pair's event stream inside a window `[w0, w1)` is fit as a univariate
//! self-exciting process with fixed decay `beta`. Writing `r_i` for event
//! times relative to the window start and `T = w1 - w0`, the log-likelihood of
//! `(mu, alpha)` is
//!
//! ```text
//! L(mu, alpha) = sum_i log(mu + alpha R_i) - mu T - (alpha / beta) sum_i (1 - exp(-beta (T - r_i)))
//! R_1 = 0,   R_i = exp(-beta (r_i - r_{i-1})) (1 + R_{i-1})
//! ```
//!
//! `alpha` is maximized over the box `[0, beta (1 - 1e-6)]` (the open
//! stationarity boundary) by Brent's derivative-free method; `mu` is either
//! fixed from an event-rate estimate (`N/T`, optionally taken from a
//! designated baseline window or tied so the within- and cross-group classes
//! share one aggregate rate) or jointly maximized by coordinate ascent, which
//! converges because `L` is concave in `(mu, alpha)`.
//!
//! Cross-pair excitation is deliberately not fit: the estimator quantifies
//! each pair's self-reinforcement, and off-diagonal terms would need G^2
//! parameters per window.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::EventLog;
use crate::pair::GroupPair;
use crate::scalar::Scalar;

/// Margin keeping `alpha` strictly inside the stationary region.
const ALPHA_BOX_MARGIN: f64 = 1e-6;
/// Streams with fewer events than this are not fit.
const MIN_EVENTS_FOR_FIT: usize = 5;
/// Absolute tolerance for the 1-D maximizer.
const OPT_TOL: f64 = 1e-7;
/// Iteration cap for the 1-D maximizer.
const OPT_MAX_ITER: usize = 200;
/// Round cap for the joint coordinate ascent.
const JOINT_MAX_ROUNDS: usize = 100;

/// Errors from the estimation entry points.
#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    /// A window must satisfy `0 <= start < end <= horizon`.
    #[error("window [{start}, {end}) is invalid for horizon {horizon}")]
    BadWindow { start: f64, end: f64, horizon: f64 },
    /// Breakpoints must be strictly increasing and interior to the horizon.
    #[error(
        "breakpoints must be strictly increasing inside (0, horizon) (violated at index {index})"
    )]
    BadBreakpoints { index: usize },
    /// Tying the within/cross baselines needs both classes to exist.
    #[error("tying within and cross baselines needs at least two groups")]
    TieNeedsTwoGroups,
    /// Tying the baselines presupposes a fixed (not jointly fit) `mu`.
    #[error("tied baselines cannot be combined with joint mu optimization")]
    TieRequiresFixedMu,
    /// A supplied baseline vector had the wrong length.
    #[error("baseline vector has length {got}, expected {expected}")]
    BaselineLength { expected: usize, got: usize },
    /// Decay rate must be finite and strictly positive.
    #[error("decay rate beta must be finite and > 0")]
    BadBeta,
}

/// Outcome of one pair's fit inside one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    /// The maximizer converged to the reported tolerance.
    Converged,
    /// Fewer than the minimum number of events; `alpha_hat` is pinned to 0.
    LowData,
    /// The iteration cap was reached; estimates are best-so-far.
    MaxIterations,
}

/// Per-window diagonal fit: one `(mu, alpha)` pair per group pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFit<F> {
    /// Number of groups the flat indexing refers to.
    pub k_groups: usize,
    /// Fit window `[start, end)`.
    pub window: (F, F),
    /// Baseline estimates, flat pair order.
    pub mu_hat: Vec<F>,
    /// Self-excitation estimates, flat pair order.
    pub alpha_hat: Vec<F>,
    /// Fixed decay rate used by the fit.
    pub beta: F,
    /// Attained per-pair log-likelihood.
    pub loglik: Vec<F>,
    /// Per-pair fit status.
    pub flags: Vec<FitStatus>,
}

/// How the baseline `mu` is determined for a windowed fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuMode<F> {
    /// Event rate `N/T` of the fit window itself (default).
    PerWindow,
    /// Event rate of a fixed baseline window, shared by all fit windows.
    FromWindow { start: F, end: F },
    /// Jointly maximized with `alpha` by coordinate ascent.
    Joint,
}

/// Options for [`estimate_windowed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowedOptions<F> {
    /// Baseline determination mode.
    pub mu_mode: MuMode<F>,
    /// Replace the per-pair baselines by class-tied values: the within pairs
    /// share half the total rate equally, the cross pairs the other half, so
    /// the aggregate within and cross baselines coincide.
    pub tie_within_cross: bool,
}

impl<F> Default for WindowedOptions<F> {
    fn default() -> Self {
        Self {
            mu_mode: MuMode::PerWindow,
            tie_within_cross: false,
        }
    }
}

/// Precomputed per-window stream quantities shared by likelihood evaluations.
struct StreamData<F> {
    /// Running excitation `R_i` at each event.
    r: Vec<F>,
    /// `sum_i (1 - exp(-beta (T - r_i))) / beta` (compensator factor of `alpha`).
    compensator_rate: F,
    /// Window length.
    t_len: F,
}

impl<F: Scalar> StreamData<F> {
    fn build(times: &[F], window: (F, F), beta: F) -> Self {
        let t_len = window.1 - window.0;
        let mut r = Vec::with_capacity(times.len());
        let mut prev_r = F::zero();
        let mut prev_t = F::zero();
        let mut comp = F::zero();
        for (idx, &t_abs) in times.iter().enumerate() {
            let t = t_abs - window.0;
            let r_i = if idx == 0 {
                F::zero()
            } else {
                (-beta * (t - prev_t)).exp() * (F::one() + prev_r)
            };
            r.push(r_i);
            comp += F::one() - (-beta * (t_len - t)).exp();
            prev_r = r_i;
            prev_t = t;
        }
        Self {
            r,
            compensator_rate: comp / beta,
            t_len,
        }
    }

    /// Log-likelihood at `(mu, alpha)`; `-inf` when a log argument is not
    /// strictly positive.
    fn loglik(&self, mu: F, alpha: F) -> F {
        let mut sum = F::zero();
        for &r_i in &self.r {
            let lam = mu + alpha * r_i;
            if lam <= F::zero() {
                return F::neg_infinity();
            }
            sum += lam.ln();
        }
        sum - mu * self.t_len - alpha * self.compensator_rate
    }

    /// Analytic `dL/dalpha` at `(mu, alpha)`.
    fn grad_alpha(&self, mu: F, alpha: F) -> F {
        let mut sum = F::zero();
        for &r_i in &self.r {
            sum += r_i / (mu + alpha * r_i);
        }
        sum - self.compensator_rate
    }

    /// Analytic `dL/dmu` at `(mu, alpha)`.
    fn grad_mu(&self, mu: F, alpha: F) -> F {
        let mut sum = F::zero();
        for &r_i in &self.r {
            sum += F::one() / (mu + alpha * r_i);
        }
        sum - self.t_len
    }
}

/// Log-likelihood of one pair's stream (absolute event times inside
/// `[window.0, window.1)`) at `(mu, alpha)` with fixed `beta`.
///
/// Exposed so independent checks (finite differences, ascent comparisons) can
/// evaluate exactly the objective the estimators maximize.
pub fn diagonal_log_likelihood<F: Scalar>(
    times: &[F],
    window: (F, F),
    mu: F,
    alpha: F,
    beta: F,
) -> F {
    StreamData::build(times, window, beta).loglik(mu, alpha)
}

/// Analytic derivative of [`diagonal_log_likelihood`] in `alpha`.
pub fn diagonal_log_likelihood_grad_alpha<F: Scalar>(
    times: &[F],
    window: (F, F),
    mu: F,
    alpha: F,
    beta: F,
) -> F {
    StreamData::build(times, window, beta).grad_alpha(mu, alpha)
}

/// Result of the 1-D bounded maximization.
struct OneDim<F> {
    x: F,
    fx: F,
    converged: bool,
}

/// Brent's derivative-free maximization on `[lo, hi]` (golden-section steps
/// with successive parabolic interpolation), absolute tolerance `tol`.
fn maximize_1d<F: Scalar>(f: impl Fn(F) -> F, lo: F, hi: F, tol: F, max_iter: usize) -> OneDim<F> {
    // Complement of the golden ratio.
    let cgold = F::lit(0.381_966_011_250_105_1);
    let tiny = F::lit(1e-21);
    let two = F::lit(2.0);
    let half = F::lit(0.5);

    let mut a = lo;
    let mut b = hi;
    let mut x = a + cgold * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = F::zero();
    let mut e = F::zero();

    for _ in 0..max_iter {
        let m = half * (a + b);
        let tol1 = tol * x.abs().max(F::one()) + tiny;
        let tol2 = two * tol1;
        if (x - m).abs() <= tol2 - half * (b - a) {
            return OneDim {
                x,
                fx,
                converged: true,
            };
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // Try a parabola through (v, fv), (w, fw), (x, fx).
            let r = (x - w) * (fx - fv);
            let q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            let mut q2 = two * (q - r);
            if q2 > F::zero() {
                p = -p;
            }
            q2 = q2.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (half * q2 * e_prev).abs() && p > q2 * (a - x) && p < q2 * (b - x) {
                d = p / q2;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + if d >= F::zero() { tol1 } else { -tol1 }
        };
        let fu = f(u);
        if fu >= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu >= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu >= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    OneDim {
        x,
        fx,
        converged: false,
    }
}

/// Refines a maximizer of a strictly concave objective by bisecting its
/// (strictly decreasing) derivative down to floating-point resolution.
///
/// The window log-likelihood is strictly concave in each coordinate, so the
/// derivative has at most one sign change on the box: no sign change means
/// the maximum sits on a boundary. `x_start` (the derivative-free result)
/// only shrinks the initial bracket.
fn polish_concave<F: Scalar>(grad: impl Fn(F) -> F, lo: F, hi: F, x_start: F) -> F {
    let g_lo = grad(lo);
    if !g_lo.is_finite() || g_lo <= F::zero() {
        return if g_lo.is_finite() { lo } else { x_start };
    }
    if grad(hi) >= F::zero() {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    if x_start > lo && x_start < hi {
        if grad(x_start) > F::zero() {
            a = x_start;
        } else {
            b = x_start;
        }
    }
    loop {
        let m = F::lit(0.5) * (a + b);
        if m <= a || m >= b {
            return m.max(a).min(b);
        }
        if grad(m) > F::zero() {
            a = m;
        } else {
            b = m;
        }
    }
}

fn check_window<F: Scalar>(window: (F, F), horizon: F) -> Result<(), EstimateError> {
    let (start, end) = window;
    let ok =
        start.is_finite() && end.is_finite() && start >= F::zero() && end > start && end <= horizon;
    if ok {
        Ok(())
    } else {
        Err(EstimateError::BadWindow {
            start: start.as_f64(),
            end: end.as_f64(),
            horizon: horizon.as_f64(),
        })
    }
}

/// Per-pair event-rate baseline `N/T` over `window`.
///
/// # Errors
///
/// Rejects windows outside `[0, horizon]`.
pub fn estimate_mu<F: Scalar>(log: &EventLog<F>, window: (F, F)) -> Result<Vec<F>, EstimateError> {
    check_window(window, log.horizon())?;
    let t_len = window.1 - window.0;
    Ok(GroupPair::all(log.k_groups())
        .into_iter()
        .map(|pair| {
            let n = log.count_in_window(pair, window.0, window.1);
            F::lit(n as f64) / t_len
        })
        .collect())
}

/// Fits one pair stream's `alpha` with fixed `mu`.
fn fit_pair_fixed_mu<F: Scalar>(times: &[F], window: (F, F), mu: F, beta: F) -> (F, F, FitStatus) {
    let data = StreamData::build(times, window, beta);
    if times.len() < MIN_EVENTS_FOR_FIT {
        return (F::zero(), data.loglik(mu, F::zero()), FitStatus::LowData);
    }
    let hi = beta * F::lit(1.0 - ALPHA_BOX_MARGIN);
    let res = maximize_1d(
        |a| data.loglik(mu, a),
        F::zero(),
        hi,
        F::lit(OPT_TOL),
        OPT_MAX_ITER,
    );
    let status = if res.converged {
        FitStatus::Converged
    } else {
        FitStatus::MaxIterations
    };
    if res.fx.is_finite() {
        let alpha = polish_concave(|a| data.grad_alpha(mu, a), F::zero(), hi, res.x);
        (alpha, data.loglik(mu, alpha), status)
    } else {
        (res.x, res.fx, status)
    }
}

/// Jointly fits one pair stream's `(mu, alpha)` by coordinate ascent.
fn fit_pair_joint<F: Scalar>(times: &[F], window: (F, F), beta: F) -> (F, F, F, FitStatus) {
    let data = StreamData::build(times, window, beta);
    let t_len = window.1 - window.0;
    let rate = F::lit(times.len() as f64) / t_len;
    if times.len() < MIN_EVENTS_FOR_FIT {
        return (
            rate,
            F::zero(),
            data.loglik(rate, F::zero()),
            FitStatus::LowData,
        );
    }
    // At any stationary point, sum 1/lambda_i = T with lambda_i >= mu forces
    // mu <= N/T, so the rate bounds the baseline search from above.
    let mu_lo = rate * F::lit(1e-9);
    let mu_hi = rate;
    let alpha_hi = beta * F::lit(1.0 - ALPHA_BOX_MARGIN);
    let tol = F::lit(OPT_TOL);
    let mut mu = rate;
    let mut alpha = F::zero();
    let mut loglik = data.loglik(mu, alpha);
    let mut status = FitStatus::MaxIterations;
    // The mu step runs first so the round (and the returned fit) ends on a
    // freshly polished alpha against the final baseline.
    for _ in 0..JOINT_MAX_ROUNDS {
        let m_step = maximize_1d(|m| data.loglik(m, alpha), mu_lo, mu_hi, tol, OPT_MAX_ITER);
        let mu_next = if m_step.fx.is_finite() {
            polish_concave(|m| data.grad_mu(m, alpha), mu_lo, mu_hi, m_step.x)
        } else {
            m_step.x
        };
        let a_step = maximize_1d(
            |a| data.loglik(mu_next, a),
            F::zero(),
            alpha_hi,
            tol,
            OPT_MAX_ITER,
        );
        let alpha_next = if a_step.fx.is_finite() {
            polish_concave(
                |a| data.grad_alpha(mu_next, a),
                F::zero(),
                alpha_hi,
                a_step.x,
            )
        } else {
            a_step.x
        };
        let moved = (alpha_next - alpha).abs().max((mu_next - mu).abs());
        mu = mu_next;
        alpha = alpha_next;
        loglik = data.loglik(mu, alpha);
        if moved <= tol {
            status = FitStatus::Converged;
            break;
        }
    }
    (mu, alpha, loglik, status)
}

/// Fits every pair's self-excitation inside `window` with the supplied fixed
/// baselines.
///
/// # Errors
///
/// Rejects invalid windows, wrong-length baselines, and bad `beta`.
pub fn estimate_alpha_diagonal<F: Scalar>(
    log: &EventLog<F>,
    window: (F, F),
    mu: &[F],
    beta: F,
) -> Result<DiagonalFit<F>, EstimateError> {
    check_window(window, log.horizon())?;
    if !beta.is_finite() || beta <= F::zero() {
        return Err(EstimateError::BadBeta);
    }
    let g = log.n_pairs();
    if mu.len() != g {
        return Err(EstimateError::BaselineLength {
            expected: g,
            got: mu.len(),
        });
    }
    let mut fit = DiagonalFit {
        k_groups: log.k_groups(),
        window,
        mu_hat: mu.to_vec(),
        alpha_hat: Vec::with_capacity(g),
        beta,
        loglik: Vec::with_capacity(g),
        flags: Vec::with_capacity(g),
    };
    for (idx, pair) in GroupPair::all(log.k_groups()).into_iter().enumerate() {
        let times = log.times_in_window(pair, window.0, window.1);
        let (alpha, ll, status) = fit_pair_fixed_mu(&times, window, mu[idx], beta);
        fit.alpha_hat.push(alpha);
        fit.loglik.push(ll);
        fit.flags.push(status);
    }
    Ok(fit)
}

/// Replaces per-pair baselines by class-tied values: within pairs share half
/// the total rate equally, cross pairs the other half.
fn tie_baselines<F: Scalar>(mu: &mut [F], k_groups: usize) -> Result<(), EstimateError> {
    if k_groups < 2 {
        return Err(EstimateError::TieNeedsTwoGroups);
    }
    let g = mu.len();
    let n_within = k_groups;
    let n_cross = g - k_groups;
    let total: F = mu.iter().copied().sum();
    let half = total / F::lit(2.0);
    let within_each = half / F::lit(n_within as f64);
    let cross_each = half / F::lit(n_cross as f64);
    for (idx, slot) in mu.iter_mut().enumerate() {
        *slot = if idx < n_within {
            within_each
        } else {
            cross_each
        };
    }
    Ok(())
}

/// Windowed estimation: splits `[0, horizon)` at the interior `breakpoints`
/// and fits each window independently under `options`.
///
/// # Errors
///
/// See [`EstimateError`].
pub fn estimate_windowed<F: Scalar>(
    log: &EventLog<F>,
    breakpoints: &[F],
    beta: F,
    options: &WindowedOptions<F>,
) -> Result<Vec<DiagonalFit<F>>, EstimateError> {
    if !beta.is_finite() || beta <= F::zero() {
        return Err(EstimateError::BadBeta);
    }
    if options.tie_within_cross && matches!(options.mu_mode, MuMode::Joint) {
        return Err(EstimateError::TieRequiresFixedMu);
    }
    let horizon = log.horizon();
    for (index, &b) in breakpoints.iter().enumerate() {
        let increasing = index == 0 || b > breakpoints[index - 1];
        if !(b.is_finite() && b > F::zero() && b < horizon && increasing) {
            return Err(EstimateError::BadBreakpoints { index });
        }
    }
    let mut edges = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(F::zero());
    edges.extend_from_slice(breakpoints);
    edges.push(horizon);

    // A shared baseline window is resolved once.
    let baseline_from_window = match options.mu_mode {
        MuMode::FromWindow { start, end } => Some(estimate_mu(log, (start, end))?),
        _ => None,
    };

    let g = log.n_pairs();
    let pairs = GroupPair::all(log.k_groups());
    let mut fits = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let window = (w[0], w[1]);
        match options.mu_mode {
            MuMode::Joint => {
                let mut fit = DiagonalFit {
                    k_groups: log.k_groups(),
                    window,
                    mu_hat: Vec::with_capacity(g),
                    alpha_hat: Vec::with_capacity(g),
                    beta,
                    loglik: Vec::with_capacity(g),
                    flags: Vec::with_capacity(g),
                };
                for pair in &pairs {
                    let times = log.times_in_window(*pair, window.0, window.1);
                    let (mu, alpha, ll, status) = fit_pair_joint(&times, window, beta);
                    fit.mu_hat.push(mu);
                    fit.alpha_hat.push(alpha);
                    fit.loglik.push(ll);
                    fit.flags.push(status);
                }
                fits.push(fit);
            }
            _ => {
                let mut mu = match &baseline_from_window {
                    Some(shared) => shared.clone(),
                    None => estimate_mu(log, window)?,
                };
                if options.tie_within_cross {
                    tie_baselines(&mut mu, log.k_groups())?;
                }
                fits.push(estimate_alpha_diagonal(log, window, &mu, beta)?);
            }
        }
    }
    Ok(fits)
}

/// Renders windowed fits as a tidy CSV regime table.
pub fn regime_table_csv<F: Scalar>(fits: &[DiagonalFit<F>]) -> String {
    let mut out =
        String::from("window_index,window_start,window_end,pair,mu_hat,alpha_hat,loglik,flag\n");
    for (w_idx, fit) in fits.iter().enumerate() {
        for (idx, pair) in GroupPair::all(fit.k_groups).into_iter().enumerate() {
            let flag = match fit.flags[idx] {
                FitStatus::Converged => "converged",
                FitStatus::LowData => "low_data",
                FitStatus::MaxIterations => "max_iterations",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                w_idx,
                fit.window.0,
                fit.window.1,
                pair.label(),
                fit.mu_hat[idx],
                fit.alpha_hat[idx],
                fit.loglik[idx],
                flag
            ));
        }
    }
    out
}
