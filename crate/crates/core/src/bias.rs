//! Within-group share measures: empirical, instantaneous, and stationary.
//!
//! All measures reduce the flat pair axis to two aggregates — within-group
//! pairs `(i, i)` and cross-group pairs `(i, j)`, `i < j` — and report the
//! within share of the total. Three time scales are covered:
//!
//! * **empirical**: cumulative event counts up to and including `t`,
//! * **instantaneous**: conditional intensities at `t` (model-based) or mean
//!   intensities (mean-field trajectory),
//! * **stationary**: fixed-point intensities of a parameterization, either
//!   exact (full matrix solve) or the diagonal closed form
//!   `lambda*_p = mu_p / (1 - alpha_p / beta)` applied to a fit.
//!
//! Undefined values (no events yet, zero total intensity, an empty
//! conditioning class) are `None`, never NaN, and serialize as empty CSV
//! fields.
//!
//! The dyad-level disparity measure [`demographic_parity_gap`] compares
//! positive-outcome rates between same-group and cross-group dyads.

use serde::Serialize;
use thiserror::Error;

use crate::estimation::DiagonalFit;
use crate::events::EventLog;
use crate::meanfield::{MeanFieldError, MeanFieldTrajectory};
use crate::params::{HawkesParams, RegimeMode, RegimeSchedule};
use crate::process::{intensity_on_grid, ProcessError};
use crate::scalar::Scalar;

/// Errors specific to bias computations.
#[derive(Debug, Error)]
pub enum BiasError {
    /// The diagonal closed form needs `alpha < beta` for every pair.
    #[error("pair index {pair_index} has alpha >= beta; no stationary intensity exists")]
    AlphaAtOrAboveBeta { pair_index: usize },
    /// All stationary intensities are zero; the share is undefined.
    #[error("total stationary intensity is zero; within share undefined")]
    DegenerateTotal,
    /// Underlying stability analysis failed.
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    /// Underlying intensity evaluation failed.
    #[error(transparent)]
    Process(#[from] ProcessError),
}

/// Splits a flat pair vector into `(within_sum, cross_sum)`.
///
/// Relies on the flat ordering placing the `k` within pairs first.
pub fn within_cross_split<F: Scalar>(values: &[F], k_groups: usize) -> (F, F) {
    let within = values[..k_groups].iter().copied().sum();
    let cross = values[k_groups..].iter().copied().sum();
    (within, cross)
}

/// Within share `w / (w + c)`; `None` when the total is zero.
pub fn within_share<F: Scalar>(within: F, cross: F) -> Option<F> {
    let total = within + cross;
    if total > F::zero() {
        Some(within / total)
    } else {
        None
    }
}

/// Cumulative empirical within share of events with time `<= t`.
///
/// `None` until the first event.
pub fn empirical_bias<F: Scalar>(log: &EventLog<F>, t: F) -> Option<F> {
    let (w, c) = log.within_cross_counts_at(t);
    if w + c == 0 {
        return None;
    }
    Some(F::lit(w as f64) / F::lit((w + c) as f64))
}

/// Instantaneous within share of the conditional intensity at `t`.
///
/// # Errors
///
/// Propagates dimension/time validation from the intensity evaluation.
pub fn instantaneous_bias<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    mode: RegimeMode,
    log: &EventLog<F>,
    t: F,
) -> Result<Option<F>, BiasError> {
    let lambdas = crate::process::intensity_at(params, schedule, mode, log, t)?;
    let (w, c) = within_cross_split(&lambdas, params.k_groups());
    Ok(within_share(w, c))
}

/// Stationary within share of a parameterization's fixed point.
///
/// # Errors
///
/// Propagates stability refusals (critical, non-stationary, ill-conditioned).
pub fn stationary_bias<F: Scalar>(params: &HawkesParams<F>) -> Result<F, BiasError> {
    stationary_bias_with_matrix(params, params.excitation())
}

/// Stationary within share with an overriding excitation matrix.
///
/// Useful for evaluating each interval of a regime schedule against the same
/// baselines.
///
/// # Errors
///
/// Propagates stability refusals; [`BiasError::DegenerateTotal`] when all
/// stationary intensities vanish.
pub fn stationary_bias_with_matrix<F: Scalar>(
    params: &HawkesParams<F>,
    matrix: &crate::linalg::SquareMatrix<F>,
) -> Result<F, BiasError> {
    let lam = crate::meanfield::stationary_intensity(params.mu(), matrix, params.beta())?;
    let (w, c) = within_cross_split(&lam, params.k_groups());
    within_share(w, c).ok_or(BiasError::DegenerateTotal)
}

/// Stationary within share implied by a diagonal fit.
///
/// Uses the closed form `lambda*_p = mu_p / (1 - alpha_p / beta)` pair by
/// pair, which is exact when cross-pair excitation is absent.
///
/// # Errors
///
/// [`BiasError::AlphaAtOrAboveBeta`] when a pair has no stationary intensity;
/// [`BiasError::DegenerateTotal`] when all intensities are zero.
pub fn stationary_bias_from_fit<F: Scalar>(fit: &DiagonalFit<F>) -> Result<F, BiasError> {
    let mut lam = Vec::with_capacity(fit.mu_hat.len());
    for (idx, (&mu, &alpha)) in fit.mu_hat.iter().zip(&fit.alpha_hat).enumerate() {
        let denom = F::one() - alpha / fit.beta;
        if denom <= F::zero() {
            return Err(BiasError::AlphaAtOrAboveBeta { pair_index: idx });
        }
        lam.push(mu / denom);
    }
    let (w, c) = within_cross_split(&lam, fit.k_groups);
    within_share(w, c).ok_or(BiasError::DegenerateTotal)
}

/// One dyad-level prediction for the disparity measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadPrediction {
    /// Whether the two endpoints belong to the same group.
    pub same_group: bool,
    /// Whether the outcome being audited occurred for this dyad.
    pub positive: bool,
}

/// Absolute demographic parity gap
/// `|P(positive | same group) - P(positive | cross group)|`.
///
/// `None` when either conditioning class is empty.
pub fn demographic_parity_gap(predictions: &[DyadPrediction]) -> Option<f64> {
    let mut same = (0usize, 0usize);
    let mut cross = (0usize, 0usize);
    for p in predictions {
        let slot = if p.same_group { &mut same } else { &mut cross };
        slot.1 += 1;
        if p.positive {
            slot.0 += 1;
        }
    }
    if same.1 == 0 || cross.1 == 0 {
        return None;
    }
    let p_same = same.0 as f64 / same.1 as f64;
    let p_cross = cross.0 as f64 / cross.1 as f64;
    Some((p_same - p_cross).abs())
}

/// Where a series' instantaneous column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasSource {
    /// True conditional intensities of a known parameterization.
    Model,
    /// Mean-field ODE trajectory.
    MeanField,
    /// Per-window stationary shares implied by diagonal fits.
    WindowedFit,
}

impl BiasSource {
    fn as_str(self) -> &'static str {
        match self {
            BiasSource::Model => "model",
            BiasSource::MeanField => "meanfield",
            BiasSource::WindowedFit => "windowed_fit",
        }
    }
}

/// Aligned empirical/instantaneous share series on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasSeries<F> {
    /// Grid times.
    pub times: Vec<F>,
    /// Cumulative empirical share at each time (`None` before any event or
    /// when no log was supplied).
    pub empirical: Vec<Option<F>>,
    /// Instantaneous share at each time (`None` where undefined).
    pub instantaneous: Vec<Option<F>>,
    /// Provenance of the instantaneous column.
    pub source: BiasSource,
}

impl<F: Scalar> BiasSeries<F> {
    /// Renders the series as CSV; undefined values become empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,b_emp,b_inst,source\n");
        let fmt = |v: &Option<F>| v.map(|x| format!("{x}")).unwrap_or_default();
        for (idx, t) in self.times.iter().enumerate() {
            out.push_str(&format!(
                "{t},{},{},{}\n",
                fmt(&self.empirical[idx]),
                fmt(&self.instantaneous[idx]),
                self.source.as_str()
            ));
        }
        out
    }
}

fn empirical_column<F: Scalar>(log: Option<&EventLog<F>>, times: &[F]) -> Vec<Option<F>> {
    match log {
        Some(log) => times.iter().map(|&t| empirical_bias(log, t)).collect(),
        None => vec![None; times.len()],
    }
}

/// Series whose instantaneous column uses the true conditional intensities.
///
/// # Errors
///
/// Propagates grid/dimension validation from the intensity sweep.
pub fn bias_series_model<F: Scalar>(
    params: &HawkesParams<F>,
    schedule: Option<&RegimeSchedule<F>>,
    mode: RegimeMode,
    log: &EventLog<F>,
    times: &[F],
) -> Result<BiasSeries<F>, BiasError> {
    let lambdas = intensity_on_grid(params, schedule, mode, log, times)?;
    let instantaneous = lambdas
        .iter()
        .map(|lam| {
            let (w, c) = within_cross_split(lam, params.k_groups());
            within_share(w, c)
        })
        .collect();
    Ok(BiasSeries {
        times: times.to_vec(),
        empirical: empirical_column(Some(log), times),
        instantaneous,
        source: BiasSource::Model,
    })
}

/// Series whose instantaneous column uses mean-field intensities.
///
/// An event log, when supplied, fills the empirical column on the
/// trajectory's own grid.
pub fn bias_series_meanfield<F: Scalar>(
    traj: &MeanFieldTrajectory<F>,
    log: Option<&EventLog<F>>,
) -> BiasSeries<F> {
    let instantaneous = traj
        .values()
        .iter()
        .map(|lam| {
            let (w, c) = within_cross_split(lam, traj.k_groups());
            within_share(w, c)
        })
        .collect();
    BiasSeries {
        times: traj.times().to_vec(),
        empirical: empirical_column(log, traj.times()),
        instantaneous,
        source: BiasSource::MeanField,
    }
}

/// Step-function series of per-window stationary shares from diagonal fits.
///
/// Each window contributes two rows (start and end) carrying the same share,
/// which renders as a step when plotted. Windows whose fit admits no
/// stationary intensity yield `None` for that window.
pub fn bias_series_windowed<F: Scalar>(
    fits: &[DiagonalFit<F>],
    log: Option<&EventLog<F>>,
) -> BiasSeries<F> {
    let mut times = Vec::with_capacity(fits.len() * 2);
    let mut instantaneous = Vec::with_capacity(fits.len() * 2);
    for fit in fits {
        let share = stationary_bias_from_fit(fit).ok();
        for &t in &[fit.window.0, fit.window.1] {
            times.push(t);
            instantaneous.push(share);
        }
    }
    BiasSeries {
        empirical: empirical_column(log, &times),
        times,
        instantaneous,
        source: BiasSource::WindowedFit,
    }
}
