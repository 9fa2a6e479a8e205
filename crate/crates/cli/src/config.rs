//! Flat-key JSON configuration files.
//!
//! Configs are plain JSON objects whose values are scalars or arrays — no
//! nested objects — so every key can be named on one line of a diff. Unknown
//! keys are hard errors, and parse failures carry the line and column of the
//! offending token. `configs/config-schema.json` documents both shapes for
//! external validators.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hawkbias::{HawkesParams64, RegimeMode, RegimeSchedule64, SquareMatrix64};

use crate::error::CliError;

/// Reads and parses a JSON config, reporting the offending line on failure.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::io(path, source))?;
    serde_json::from_str(&text).map_err(|err| CliError::usage(format!("{}: {err}", path.display())))
}

/// Parses a config from an embedded string (used by `reproduce`).
pub fn parse_embedded<T: serde::de::DeserializeOwned>(
    name: &str,
    text: &str,
) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|err| CliError::usage(format!("{name}: {err}")))
}

/// Parameters of a group-pair process, with an optional regime schedule.
///
/// Exactly one of `excitation_rows` / `excitation_diagonal` describes the
/// base matrix; when a schedule is given the base may be omitted and defaults
/// to the first regime matrix. `breakpoints` are interval start times and
/// must begin with 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    /// Number of groups; vectors use the flat pair order (all within pairs
    /// first, then cross pairs lexicographically).
    pub k_groups: usize,
    /// Baseline rates, one per group pair.
    pub mu: Vec<f64>,
    /// Full excitation matrix as rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitation_rows: Option<Vec<Vec<f64>>>,
    /// Diagonal excitation shorthand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitation_diagonal: Option<Vec<f64>>,
    /// Kernel decay rate.
    pub beta: f64,
    /// Simulation or integration horizon; may instead come from a flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Base random seed; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Regime interval start times, beginning with 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    /// One diagonal per regime interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_diagonals: Option<Vec<Vec<f64>>>,
    /// One full matrix (as rows) per regime interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_matrices: Option<Vec<Vec<Vec<f64>>>>,
    /// How switches treat pre-switch history: `reweight-history` (default)
    /// or `freeze-at-event-time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl ProcessConfig {
    /// Builds the regime schedule, if the config declares one.
    pub fn schedule(&self) -> Result<Option<RegimeSchedule64>, CliError> {
        let Some(breakpoints) = &self.breakpoints else {
            if self.regime_diagonals.is_some() || self.regime_matrices.is_some() {
                return Err(CliError::usage(
                    "regime matrices given without breakpoints".to_string(),
                ));
            }
            return Ok(None);
        };
        let schedule = match (&self.regime_diagonals, &self.regime_matrices) {
            (Some(diagonals), None) => {
                RegimeSchedule64::diagonal(breakpoints.clone(), diagonals)
                    .map_err(|err| CliError::usage(format!("invalid schedule: {err}")))?
            }
            (None, Some(rows_list)) => {
                let mut matrices = Vec::with_capacity(rows_list.len());
                for rows in rows_list {
                    matrices.push(
                        SquareMatrix64::from_rows(rows)
                            .map_err(|err| CliError::usage(format!("invalid schedule: {err}")))?,
                    );
                }
                RegimeSchedule64::new(breakpoints.clone(), matrices)
                    .map_err(|err| CliError::usage(format!("invalid schedule: {err}")))?
            }
            (None, None) => {
                return Err(CliError::usage(
                    "breakpoints given without regime_diagonals or regime_matrices".to_string(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::usage(
                    "give regime_diagonals or regime_matrices, not both".to_string(),
                ))
            }
        };
        Ok(Some(schedule))
    }

    /// Builds the Hawkes parameters (base excitation).
    pub fn params(&self) -> Result<HawkesParams64, CliError> {
        let build = |matrix: SquareMatrix64| {
            HawkesParams64::new(self.k_groups, self.mu.clone(), matrix, self.beta)
                .map_err(|err| CliError::usage(format!("invalid parameters: {err}")))
        };
        match (&self.excitation_rows, &self.excitation_diagonal) {
            (Some(rows), None) => build(
                SquareMatrix64::from_rows(rows)
                    .map_err(|err| CliError::usage(format!("invalid excitation: {err}")))?,
            ),
            (None, Some(diag)) => build(SquareMatrix64::from_diagonal(diag)),
            (None, None) => {
                // Fall back to the first regime matrix when a schedule exists.
                let schedule = self.schedule()?.ok_or_else(|| {
                    CliError::usage(
                        "one of excitation_rows or excitation_diagonal is required".to_string(),
                    )
                })?;
                build(schedule.matrices()[0].clone())
            }
            (Some(_), Some(_)) => Err(CliError::usage(
                "give excitation_rows or excitation_diagonal, not both".to_string(),
            )),
        }
    }

    /// Resolves the history mode for regime switches.
    pub fn regime_mode(&self) -> Result<RegimeMode, CliError> {
        match self.mode.as_deref() {
            None | Some("reweight-history") => Ok(RegimeMode::ReweightHistory),
            Some("freeze-at-event-time") => Ok(RegimeMode::FreezeAtEventTime),
            Some(other) => Err(CliError::usage(format!(
                "unknown mode '{other}'; expected reweight-history or freeze-at-event-time"
            ))),
        }
    }

    /// Horizon from the config or an overriding flag; must be positive.
    pub fn resolve_horizon(&self, flag: Option<f64>) -> Result<f64, CliError> {
        let horizon = flag.or(self.horizon).ok_or_else(|| {
            CliError::usage("horizon required (config key or --horizon)".to_string())
        })?;
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(CliError::usage(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(horizon)
    }

    /// Seed from the config or an overriding flag; defaults to 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(0)
    }

    /// Interior regime breakpoints (start times without the leading 0),
    /// usable as estimation window boundaries.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        match &self.breakpoints {
            Some(b) if b.len() > 1 => b[1..].to_vec(),
            _ => Vec::new(),
        }
    }

    /// The config as a JSON value, for manifest snapshots.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
