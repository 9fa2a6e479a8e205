//! Model parameters for the group-pair self-exciting process.
//!
//! The process assigns each group pair `p` a conditional intensity
//!
//! ```text
//! lambda_p(t) = mu_p + sum_q sum_{s < t, mark(s) = q} alpha[p][q] * exp(-beta (t - s))
//! ```
//!
//! where `mu` is the baseline rate vector, `alpha` is the G x G excitation
//! matrix in row = target, column = source orientation, and `beta` is the
//! shared exponential decay rate. A [`RegimeSchedule`] switches the excitation
//! matrix at fixed breakpoints while `mu` and `beta` stay constant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SquareMatrix;
use crate::pair::pair_count;
use crate::scalar::Scalar;

/// Errors from constructing [`HawkesParams`].
#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    /// Group count must be positive.
    #[error("need at least one group")]
    NoGroups,
    /// `mu` length must equal the pair count.
    #[error("baseline vector has length {got}, expected {expected}")]
    BaselineLength { expected: usize, got: usize },
    /// A baseline entry was negative or non-finite.
    #[error("baseline rate for pair index {index} must be finite and >= 0")]
    BadBaseline { index: usize },
    /// The excitation matrix dimension must equal the pair count.
    #[error("excitation matrix is {got} x {got}, expected {expected} x {expected}")]
    ExcitationDimension { expected: usize, got: usize },
    /// An excitation entry was negative or non-finite.
    #[error("excitation entry ({row}, {col}) must be finite and >= 0")]
    BadExcitation { row: usize, col: usize },
    /// Decay rate must be finite and strictly positive.
    #[error("decay rate beta must be finite and > 0")]
    BadBeta,
}

/// Errors from constructing a [`RegimeSchedule`].
#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    /// At least one interval is required.
    #[error("schedule needs at least one interval")]
    Empty,
    /// The first breakpoint must be exactly zero.
    #[error("first breakpoint must be 0, got {got}")]
    FirstNotZero { got: f64 },
    /// Breakpoints must be finite and strictly increasing.
    #[error("breakpoints must be finite and strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
    /// One matrix per interval is required.
    #[error("got {matrices} matrices for {breakpoints} breakpoints; need one per interval")]
    CountMismatch { breakpoints: usize, matrices: usize },
    /// All matrices must share one dimension.
    #[error("matrix {index} is {got} x {got}, expected {expected} x {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    /// An excitation entry was negative or non-finite.
    #[error("matrix {index} entry ({row}, {col}) must be finite and >= 0")]
    BadEntry {
        index: usize,
        row: usize,
        col: usize,
    },
}

/// How past events are weighted across a regime switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegimeMode {
    /// Decayed contributions of all past events are re-weighted by the matrix
    /// active at the evaluation time: at a switch the intensity jumps to what
    /// the new matrix assigns the accumulated excitation state. Default.
    #[default]
    ReweightHistory,
    /// Each event keeps the excitation weights of the matrix active when it
    /// occurred; a switch only affects events from then on.
    FreezeAtEventTime,
}

/// Baseline rates, excitation matrix, and decay rate for one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesParams<F> {
    k_groups: usize,
    mu: Vec<F>,
    excitation: SquareMatrix<F>,
    beta: F,
}

impl<F: Scalar> HawkesParams<F> {
    /// Validates and assembles a parameter set.
    ///
    /// # Errors
    ///
    /// Rejects empty group sets, wrong-length `mu`, negative or non-finite
    /// rates and excitation entries, wrong matrix dimensions, and
    /// non-positive `beta`.
    pub fn new(
        k_groups: usize,
        mu: Vec<F>,
        excitation: SquareMatrix<F>,
        beta: F,
    ) -> Result<Self, ParamsError> {
        if k_groups == 0 {
            return Err(ParamsError::NoGroups);
        }
        let g = pair_count(k_groups);
        if mu.len() != g {
            return Err(ParamsError::BaselineLength {
                expected: g,
                got: mu.len(),
            });
        }
        for (index, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m < F::zero() {
                return Err(ParamsError::BadBaseline { index });
            }
        }
        if excitation.n() != g {
            return Err(ParamsError::ExcitationDimension {
                expected: g,
                got: excitation.n(),
            });
        }
        for row in 0..g {
            for col in 0..g {
                let v = excitation.get(row, col);
                if !v.is_finite() || v < F::zero() {
                    return Err(ParamsError::BadExcitation { row, col });
                }
            }
        }
        if !beta.is_finite() || beta <= F::zero() {
            return Err(ParamsError::BadBeta);
        }
        Ok(Self {
            k_groups,
            mu,
            excitation,
            beta,
        })
    }

    /// Convenience constructor for purely self-exciting (diagonal) dynamics.
    ///
    /// # Errors
    ///
    /// Same validation as [`HawkesParams::new`]; `alpha_diag` must have one
    /// entry per pair.
    pub fn diagonal(
        k_groups: usize,
        mu: Vec<F>,
        alpha_diag: &[F],
        beta: F,
    ) -> Result<Self, ParamsError> {
        let g = pair_count(k_groups);
        if alpha_diag.len() != g {
            return Err(ParamsError::ExcitationDimension {
                expected: g,
                got: alpha_diag.len(),
            });
        }
        Self::new(k_groups, mu, SquareMatrix::from_diagonal(alpha_diag), beta)
    }

    /// Number of groups K.
    #[inline]
    pub fn k_groups(&self) -> usize {
        self.k_groups
    }

    /// Number of group pairs G = K(K+1)/2.
    #[inline]
    pub fn n_pairs(&self) -> usize {
        pair_count(self.k_groups)
    }

    /// Baseline rate vector in flat pair order.
    #[inline]
    pub fn mu(&self) -> &[F] {
        &self.mu
    }

    /// Excitation matrix (row = target pair, column = source pair).
    #[inline]
    pub fn excitation(&self) -> &SquareMatrix<F> {
        &self.excitation
    }

    /// Shared exponential decay rate.
    #[inline]
    pub fn beta(&self) -> F {
        self.beta
    }

    /// Returns a copy with a different excitation matrix, revalidated.
    ///
    /// # Errors
    ///
    /// Same excitation validation as [`HawkesParams::new`].
    pub fn with_excitation(&self, excitation: SquareMatrix<F>) -> Result<Self, ParamsError> {
        Self::new(self.k_groups, self.mu.clone(), excitation, self.beta)
    }
}

/// Piecewise-constant excitation: matrix `k` applies on
/// `[breakpoints[k], breakpoints[k+1])`, the last matrix extending to the
/// horizon supplied at use time.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSchedule<F> {
    breakpoints: Vec<F>,
    matrices: Vec<SquareMatrix<F>>,
}

impl<F: Scalar> RegimeSchedule<F> {
    /// Validates and assembles a schedule. `breakpoints[0]` must be zero and
    /// the sequence strictly increasing; one matrix per interval.
    ///
    /// # Errors
    ///
    /// See [`ScheduleError`].
    pub fn new(breakpoints: Vec<F>, matrices: Vec<SquareMatrix<F>>) -> Result<Self, ScheduleError> {
        if breakpoints.is_empty() || matrices.is_empty() {
            return Err(ScheduleError::Empty);
        }
        if breakpoints.len() != matrices.len() {
            return Err(ScheduleError::CountMismatch {
                breakpoints: breakpoints.len(),
                matrices: matrices.len(),
            });
        }
        if breakpoints[0] != F::zero() {
            return Err(ScheduleError::FirstNotZero {
                got: breakpoints[0].as_f64(),
            });
        }
        for index in 0..breakpoints.len() {
            if !breakpoints[index].is_finite()
                || (index > 0 && breakpoints[index] <= breakpoints[index - 1])
            {
                return Err(ScheduleError::NotIncreasing { index });
            }
        }
        let expected = matrices[0].n();
        for (index, m) in matrices.iter().enumerate() {
            if m.n() != expected {
                return Err(ScheduleError::DimensionMismatch {
                    index,
                    expected,
                    got: m.n(),
                });
            }
            for row in 0..m.n() {
                for col in 0..m.n() {
                    let v = m.get(row, col);
                    if !v.is_finite() || v < F::zero() {
                        return Err(ScheduleError::BadEntry { index, row, col });
                    }
                }
            }
        }
        Ok(Self {
            breakpoints,
            matrices,
        })
    }

    /// Builds a schedule of diagonal matrices from per-interval diagonals.
    ///
    /// # Errors
    ///
    /// See [`ScheduleError`].
    pub fn diagonal(breakpoints: Vec<F>, diagonals: &[Vec<F>]) -> Result<Self, ScheduleError> {
        let matrices = diagonals
            .iter()
            .map(|d| SquareMatrix::from_diagonal(d))
            .collect();
        Self::new(breakpoints, matrices)
    }

    /// Number of intervals.
    #[inline]
    pub fn n_intervals(&self) -> usize {
        self.matrices.len()
    }

    /// Interval start times, beginning with 0.
    #[inline]
    pub fn breakpoints(&self) -> &[F] {
        &self.breakpoints
    }

    /// Per-interval excitation matrices.
    #[inline]
    pub fn matrices(&self) -> &[SquareMatrix<F>] {
        &self.matrices
    }

    /// Matrix dimension (shared by all intervals).
    #[inline]
    pub fn dimension(&self) -> usize {
        self.matrices[0].n()
    }

    /// Index of the interval containing time `t` (clamped to the last interval
    /// for `t` past the final breakpoint; `t` before zero maps to the first).
    pub fn interval_index(&self, t: F) -> usize {
        self.breakpoints.iter().rposition(|&b| b <= t).unwrap_or(0)
    }

    /// Excitation matrix active at time `t`.
    #[inline]
    pub fn matrix_at(&self, t: F) -> &SquareMatrix<F> {
        &self.matrices[self.interval_index(t)]
    }

    /// `(start, end, matrix-index)` triples covering `[0, horizon)`.
    pub fn intervals(&self, horizon: F) -> Vec<(F, F, usize)> {
        let mut out = Vec::with_capacity(self.matrices.len());
        for k in 0..self.matrices.len() {
            let start = self.breakpoints[k];
            let end = if k + 1 < self.breakpoints.len() {
                self.breakpoints[k + 1]
            } else {
                horizon
            };
            out.push((start, end.min(horizon), k));
        }
        out
    }

    /// Smallest gap between consecutive breakpoints (and to the horizon).
    pub fn min_gap(&self, horizon: F) -> F {
        let mut min = F::infinity();
        for (start, end, _) in self.intervals(horizon) {
            let gap = end - start;
            if gap > F::zero() && gap < min {
                min = gap;
            }
        }
        min
    }

    /// Largest breakpoint.
    pub fn last_breakpoint(&self) -> F {
        *self.breakpoints.last().expect("validated non-empty")
    }
}
