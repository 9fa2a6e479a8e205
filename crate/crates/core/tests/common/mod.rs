//! Shared fixtures and independent numeric oracles for the integration suite.
//!
//! The oracles here are deliberately written against closed forms — Cramer's
//! rule, the trigonometric cubic-root formula, textbook KS statistics — so
//! that cross-checks never reuse the library's own linear algebra or
//! optimization paths.

#![allow(dead_code)]

use hawkbias::process::simulate;
use hawkbias::{EventLog64, HawkesParams64, RegimeMode, RegimeSchedule64, SquareMatrix64};

// ---------------------------------------------------------------------------
// Two-group mixed-coupling fixture (K = 2, three pairs, off-diagonal terms).
// ---------------------------------------------------------------------------

pub const TWO_GROUP_MU: [f64; 3] = [0.8, 0.5, 0.2];
pub const TWO_GROUP_ROWS: [[f64; 3]; 3] =
    [[0.60, 0.0, 0.05], [0.0, 0.40, 0.05], [0.10, 0.10, 0.20]];
pub const TWO_GROUP_BETA: f64 = 1.0;

pub fn two_group_matrix() -> SquareMatrix64 {
    SquareMatrix64::from_rows(
        &TWO_GROUP_ROWS
            .iter()
            .map(|r| r.to_vec())
            .collect::<Vec<_>>(),
    )
    .expect("fixture matrix is square and nonnegative")
}

pub fn two_group_params() -> HawkesParams64 {
    HawkesParams64::new(2, TWO_GROUP_MU.to_vec(), two_group_matrix(), TWO_GROUP_BETA)
        .expect("fixture parameters are valid")
}

// ---------------------------------------------------------------------------
// Three-regime two-stream fixture. K = 2 encoding with the flat pair order
// [(1,1), (2,2), (1,2)]: pair (1,1) carries the within stream, pair (1,2)
// the cross stream, and pair (2,2) stays silent.
// ---------------------------------------------------------------------------

pub const STREAM_MU_W: f64 = 0.8;
pub const STREAM_MU_C: f64 = 0.6;
pub const STREAM_BETA: f64 = 1.0;
pub const STREAM_BREAKS: [f64; 2] = [500.0, 1000.0];
pub const STREAM_HORIZON: f64 = 1500.0;
pub const STREAM_ALPHA_W: [f64; 3] = [0.40, 0.75, 0.50];
pub const STREAM_ALPHA_C: [f64; 3] = [0.20, 0.15, 0.50];
/// Flat index of the within stream.
pub const STREAM_IDX_W: usize = 0;
/// Flat index of the cross stream.
pub const STREAM_IDX_C: usize = 2;

/// Per-pair vector `[within, silent, cross]` in flat order.
pub fn stream_vec(within: f64, cross: f64) -> Vec<f64> {
    vec![within, 0.0, cross]
}

pub fn two_stream_params() -> HawkesParams64 {
    HawkesParams64::diagonal(
        2,
        stream_vec(STREAM_MU_W, STREAM_MU_C),
        &stream_vec(STREAM_ALPHA_W[0], STREAM_ALPHA_C[0]),
        STREAM_BETA,
    )
    .expect("fixture parameters are valid")
}

pub fn two_stream_schedule() -> RegimeSchedule64 {
    let mut starts = vec![0.0];
    starts.extend_from_slice(&STREAM_BREAKS);
    let diags: Vec<Vec<f64>> = (0..3)
        .map(|k| stream_vec(STREAM_ALPHA_W[k], STREAM_ALPHA_C[k]))
        .collect();
    RegimeSchedule64::diagonal(starts, &diags).expect("fixture schedule is valid")
}

pub fn simulate_two_stream(seed: u64) -> EventLog64 {
    simulate(
        &two_stream_params(),
        Some(&two_stream_schedule()),
        RegimeMode::ReweightHistory,
        STREAM_HORIZON,
        seed,
    )
    .expect("fixture simulation succeeds")
}

/// Closed-form stationary within share for one regime of the two-stream
/// fixture: `(mu_w/(1-a_w)) / (mu_w/(1-a_w) + mu_c/(1-a_c))`.
pub fn two_stream_regime_share(alpha_w: f64, alpha_c: f64) -> f64 {
    let lw = STREAM_MU_W / (1.0 - alpha_w / STREAM_BETA);
    let lc = STREAM_MU_C / (1.0 - alpha_c / STREAM_BETA);
    lw / (lw + lc)
}

// ---------------------------------------------------------------------------
// Independent linear-algebra oracles.
// ---------------------------------------------------------------------------

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's-rule solve of a 3x3 system, independent of the library's
/// elimination-based solver.
pub fn cramer_solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> [f64; 3] {
    let d = det3(a);
    assert!(d.abs() > 1e-14, "oracle system must be well-posed");
    let mut out = [0.0; 3];
    for col in 0..3 {
        let mut m = *a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        out[col] = det3(&m) / d;
    }
    out
}

/// Characteristic-polynomial coefficients of a 3x3 matrix:
/// `x^3 + c2 x^2 + c1 x + c0`.
pub fn char_poly3(m: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
    (-trace, minors, -det3(m))
}

/// Largest real root of `x^3 + c2 x^2 + c1 x + c0` via the trigonometric
/// method (requires the all-real-roots case, which holds for the fixtures).
pub fn cubic_largest_root(c2: f64, c1: f64, c0: f64) -> f64 {
    let shift = -c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;
    assert!(p < 0.0, "trigonometric form needs p < 0, got {p}");
    let disc = -4.0 * p.powi(3) - 27.0 * q * q;
    assert!(
        disc > 0.0,
        "three distinct real roots expected, discriminant {disc}"
    );
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
    let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
    shift + m * theta.cos()
}

// ---------------------------------------------------------------------------
// Kolmogorov–Smirnov helpers.
// ---------------------------------------------------------------------------

/// One-sample KS statistic of `waits` against the unit exponential
/// distribution.
pub fn ks_statistic_exp1(waits: &[f64]) -> f64 {
    let mut sorted = waits.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("waits are finite"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (idx, &w) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-w).exp();
        let above = (idx as f64 + 1.0) / n - cdf;
        let below = cdf - idx as f64 / n;
        d = d.max(above.max(below));
    }
    d
}

/// 1%-significance critical value for the one-sample KS statistic
/// (asymptotic constant with the standard finite-sample correction).
pub fn ks_critical_1pct(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    1.62762 / (s + 0.12 + 0.11 / s)
}

// ---------------------------------------------------------------------------
// Small numeric conveniences.
// ---------------------------------------------------------------------------

/// Mean of a slice (panics on empty input).
pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty slice");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Largest absolute difference between two equal-length slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
