//! `netsim`: the full network-and-recommender loop with bias reporting.

use std::path::PathBuf;

use serde::Serialize;

use hawkbias::bias::{empirical_bias, stationary_bias_from_fit};
use hawkbias::estimation::estimate_windowed;
use hawkbias::netsim::policy::{builtin_policies, policy_by_name};
use hawkbias::netsim::{audit_csv, run_full_simulation, NetsimOutcome, ParityTally, SimConfig};
use hawkbias::{MuMode, WindowedOptions};

use crate::config;
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output;
use crate::replicate;

#[derive(Debug, clap::Args)]
pub struct NetsimArgs {
    /// Network simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Recommender policy driving the link-prediction phase.
    #[arg(long)]
    pub policy: String,
    /// Overrides the config's retrain period (0 = fit once at phase start).
    #[arg(long)]
    pub retrain: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $HAWKBIAS_OUT/netsim or ./netsim).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of independent replicates (seeds base, base+1, ...).
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Worker threads for replicates.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// End-to-end bias summary of one run.
#[derive(Debug, Serialize)]
pub struct BiasReport {
    pub policy: String,
    pub seed: u64,
    pub events: usize,
    pub edges: usize,
    /// Cumulative within share at the end of the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_emp: Option<f64>,
    /// Estimated stationary within share of the link-prediction phase.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_star_lp: Option<f64>,
    /// Mean fitted within-group excitation in the link-prediction phase.
    pub within_alpha_lp: f64,
    /// Acceptance parity over recommended candidates.
    pub parity: ParityTally,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity_gap: Option<f64>,
}

/// Runs one simulation and derives its bias report.
///
/// The baseline rates for the link-prediction fit come from the organic
/// pre-phase window, so the fitted excitation isolates what the recommender
/// changed.
pub fn run_one(
    config: &SimConfig,
    policy_name: &str,
) -> Result<(NetsimOutcome, BiasReport), CliError> {
    let mut policy = policy_by_name(policy_name, config.embedding_dim)
        .map_err(|_| unknown_policy(policy_name))?;
    let outcome = run_full_simulation(config, policy.as_mut()).map_err(CliError::numerical)?;
    let pre_end = config.horizon_pre as f64;
    let options = WindowedOptions {
        mu_mode: MuMode::FromWindow {
            start: 0.0,
            end: pre_end,
        },
        tie_within_cross: false,
    };
    let fits =
        estimate_windowed(&outcome.log, &[pre_end], 1.0, &options).map_err(CliError::numerical)?;
    let lp_fit = &fits[1];
    let parity = outcome.lp_parity();
    let report = BiasReport {
        policy: policy_name.to_string(),
        seed: config.seed,
        events: outcome.log.len(),
        edges: outcome.graph.n_edges(),
        b_emp: empirical_bias(&outcome.log, outcome.log.horizon()),
        b_star_lp: stationary_bias_from_fit(lp_fit).ok(),
        within_alpha_lp: lp_fit.alpha_hat[..lp_fit.k_groups].iter().sum::<f64>()
            / lp_fit.k_groups as f64,
        parity_gap: parity.gap(),
        parity,
    };
    Ok((outcome, report))
}

pub fn run(args: &NetsimArgs) -> Result<(), CliError> {
    replicate::check_counts(args.replicates, args.jobs)?;
    let mut cfg: SimConfig = config::load(&args.config)?;
    if let Some(period) = args.retrain {
        cfg.retrain_period = period;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()
        .map_err(|err| CliError::usage(format!("invalid config: {err}")))?;
    // Fail on a bad policy name before any simulation work runs.
    run_one_policy_check(&args.policy, cfg.embedding_dim)?;

    let dir = output::resolve_dir(args.out.clone(), "netsim");
    output::ensure_dir(&dir)?;
    let base_seed = cfg.seed;

    let summaries = replicate::run(&dir, base_seed, args.replicates, args.jobs, |slot| {
        let run_cfg = SimConfig {
            seed: slot.seed,
            ..cfg.clone()
        };
        let (outcome, report) = run_one(&run_cfg, &args.policy)?;
        let snapshot = serde_json::to_value(&run_cfg).expect("config serializes");
        let mut manifest = RunManifest::new("netsim", snapshot)
            .with_seed(slot.seed)
            .with_input(args.config.display());
        output::write_text(
            &slot.dir,
            manifest.output("edges.csv"),
            &outcome.graph.edges_csv(),
        )?;
        output::write_text(
            &slot.dir,
            manifest.output("events.jsonl"),
            &outcome.log.to_jsonl_string(),
        )?;
        output::write_text(
            &slot.dir,
            manifest.output("audit.csv"),
            &audit_csv(&outcome.audit),
        )?;
        output::write_json(&slot.dir, manifest.output("bias_report.json"), &report)?;
        manifest.write(&slot.dir)?;
        println!(
            "netsim: policy {} seed {} -> {} events, {} edges ({})",
            args.policy,
            slot.seed,
            report.events,
            report.edges,
            slot.dir.display()
        );
        Ok(vec![
            report.events as f64,
            report.edges as f64,
            report.b_emp.unwrap_or(f64::NAN),
            report.b_star_lp.unwrap_or(f64::NAN),
            report.parity_gap.unwrap_or(f64::NAN),
        ])
    })?;

    if args.replicates > 1 {
        let seeds: Vec<u64> = (0..args.replicates).map(|k| base_seed + k as u64).collect();
        let csv = replicate::summary_csv(
            &["events", "edges", "b_emp", "b_star_lp", "ddp_gap"],
            &summaries,
            &seeds,
        );
        let snapshot = serde_json::to_value(&cfg).expect("config serializes");
        let mut manifest = RunManifest::new("netsim", snapshot)
            .with_seed(base_seed)
            .with_input(args.config.display());
        output::write_text(&dir, manifest.output("summary.csv"), &csv)?;
        manifest.write(&dir)?;
    }
    Ok(())
}

/// Validates the policy name alone (cheap, no simulation state).
fn run_one_policy_check(name: &str, dim: usize) -> Result<(), CliError> {
    policy_by_name(name, dim)
        .map(|_| ())
        .map_err(|_| unknown_policy(name))
}

fn unknown_policy(name: &str) -> CliError {
    let names: Vec<String> = builtin_policies()
        .iter()
        .map(|p| p.name().to_string())
        .collect();
    CliError::usage(format!(
        "unknown policy '{name}'; built-in policies: {}",
        names.join(", ")
    ))
}
