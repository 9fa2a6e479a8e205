//! `analyze`: stability diagnostics, mean-field trajectories, bias series,
//! and decay-bound verification.

use std::path::{Path, PathBuf};

use serde::Serialize;

use hawkbias::bias::{
    bias_series_meanfield, stationary_bias_from_fit, within_cross_split, within_share,
};
use hawkbias::meanfield::{integrate_meanfield, stability_report, verify_convergence_bound};
use hawkbias::{DiagonalFit64, StabilityReport64};

use crate::config::{self, ProcessConfig};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output;

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    /// Process config JSON to analyze.
    #[arg(long, conflicts_with = "fit")]
    pub params: Option<PathBuf>,
    /// Fit JSON (from `estimate`) to analyze instead.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Integration horizon for the trajectory and bias series.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Integration step override.
    #[arg(long)]
    pub step: Option<f64>,
    /// Also check the exponential decay bound along the trajectory.
    #[arg(long = "verify-bound")]
    pub verify_bound: bool,
    /// Safety factor on the decay rate used by the bound.
    #[arg(long, default_value_t = 0.9)]
    pub safety: f64,
    /// Output directory (default: $HAWKBIAS_OUT/analyze or ./analyze).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Stability diagnostics for one regime interval.
#[derive(Debug, Serialize)]
struct IntervalReport {
    start: f64,
    report: StabilityReport64,
    /// Stationary within share; absent when no fixed point exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    b_star: Option<f64>,
}

/// Fallback horizon when neither the flag nor the config provides one: long
/// enough to show several relaxation times at the shipped decay rates.
const DEFAULT_HORIZON: f64 = 50.0;

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    match (&args.params, &args.fit) {
        (Some(path), None) => analyze_params(args, path),
        (None, Some(path)) => analyze_fit(args, path),
        _ => Err(CliError::usage(
            "exactly one of --params or --fit is required".to_string(),
        )),
    }
}

fn analyze_params(args: &AnalyzeArgs, path: &Path) -> Result<(), CliError> {
    let cfg: ProcessConfig = config::load(path)?;
    let params = cfg.params()?;
    let schedule = cfg.schedule()?;
    let horizon = args.horizon.or(cfg.horizon).unwrap_or_else(|| {
        schedule
            .as_ref()
            .map_or(DEFAULT_HORIZON, |s| s.last_breakpoint() + DEFAULT_HORIZON)
    });
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(CliError::usage(format!(
            "horizon must be positive, got {horizon}"
        )));
    }

    // One stability report per regime interval (one in total without a
    // schedule). Supercritical or critical intervals are reported, not
    // rejected: detection is a result.
    let mut intervals = Vec::new();
    let matrices: Vec<(f64, &hawkbias::SquareMatrix64)> = match &schedule {
        Some(s) => s.breakpoints().iter().copied().zip(s.matrices()).collect(),
        None => vec![(0.0, params.excitation())],
    };
    for (start, matrix) in matrices {
        let report =
            stability_report(params.mu(), matrix, params.beta()).map_err(CliError::numerical)?;
        let b_star = report.stationary.as_ref().and_then(|lam| {
            let (w, c) = within_cross_split(lam, params.k_groups());
            within_share(w, c)
        });
        intervals.push(IntervalReport {
            start,
            report,
            b_star,
        });
    }

    let traj = integrate_meanfield(&params, schedule.as_ref(), horizon, args.step)
        .map_err(CliError::numerical)?;

    let dir = output::resolve_dir(args.out.clone(), "analyze");
    output::ensure_dir(&dir)?;
    let mut manifest = RunManifest::new("analyze", cfg.snapshot()).with_input(path.display());
    output::write_json(&dir, manifest.output("stability.json"), &intervals)?;
    output::write_text(&dir, manifest.output("trajectory.csv"), &traj.to_csv())?;
    output::write_text(
        &dir,
        manifest.output("bias_meanfield.csv"),
        &bias_series_meanfield(&traj, None).to_csv(),
    )?;
    let mut bound_note = String::new();
    if args.verify_bound {
        if !(args.safety.is_finite() && args.safety > 0.0 && args.safety <= 1.0) {
            return Err(CliError::usage(format!(
                "--safety must lie in (0, 1], got {}",
                args.safety
            )));
        }
        let check = verify_convergence_bound(&traj, args.safety).map_err(CliError::numerical)?;
        output::write_json(&dir, manifest.output("bound.json"), &check)?;
        output::write_text(&dir, manifest.output("margins.csv"), &check.margins_csv())?;
        bound_note = format!(", bound pass: {}", check.pass);
    }
    manifest.write(&dir)?;
    let regimes: Vec<String> = intervals
        .iter()
        .map(|i| format!("{:?}", i.report.regime).to_lowercase())
        .collect();
    println!(
        "analyze: {} interval(s) [{}]{bound_note} ({})",
        intervals.len(),
        regimes.join(", "),
        dir.display()
    );
    Ok(())
}

/// Per-window summary derived from a stored fit.
#[derive(Debug, Serialize)]
struct FitWindowReport {
    start: f64,
    end: f64,
    /// Largest fitted branching ratio across pairs.
    rho_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_star: Option<f64>,
}

fn analyze_fit(args: &AnalyzeArgs, path: &Path) -> Result<(), CliError> {
    let fits: Vec<DiagonalFit64> = config::load(path)?;
    if fits.is_empty() {
        return Err(CliError::usage("fit file contains no windows".to_string()));
    }
    let windows: Vec<FitWindowReport> = fits
        .iter()
        .map(|fit| FitWindowReport {
            start: fit.window.0,
            end: fit.window.1,
            rho_hat: fit.alpha_hat.iter().fold(0.0f64, |a, &b| a.max(b)) / fit.beta,
            b_star: stationary_bias_from_fit(fit).ok(),
        })
        .collect();
    let dir = output::resolve_dir(args.out.clone(), "analyze");
    output::ensure_dir(&dir)?;
    let mut manifest = RunManifest::new(
        "analyze",
        serde_json::json!({ "fit": path.display().to_string() }),
    )
    .with_input(path.display());
    output::write_json(&dir, manifest.output("fit_windows.json"), &windows)?;
    manifest.write(&dir)?;
    println!(
        "analyze: {} fitted window(s) summarized ({})",
        windows.len(),
        dir.display()
    );
    Ok(())
}
