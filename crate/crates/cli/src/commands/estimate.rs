//! `estimate`: windowed diagonal MLE from an event-log file.

use std::path::PathBuf;

use hawkbias::bias::bias_series_windowed;
use hawkbias::estimation::{estimate_windowed, regime_table_csv};
use hawkbias::{EventLog64, FitStatus, MuMode, WindowedOptions};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output;

#[derive(Debug, clap::Args)]
pub struct EstimateArgs {
    /// Event log in JSONL form.
    #[arg(long)]
    pub log: PathBuf,
    /// Interior window boundaries, comma-separated (e.g. `500,1000`).
    #[arg(long)]
    pub breakpoints: Option<String>,
    /// Kernel decay rate the fit conditions on.
    #[arg(long)]
    pub beta: f64,
    /// Tie baselines so aggregate within and cross rates coincide.
    #[arg(long = "tie-mu-wc")]
    pub tie_mu_wc: bool,
    /// Fix baselines from this window (`start,end`) instead of per window.
    #[arg(long = "mu-from-window", conflicts_with = "mu_joint")]
    pub mu_from_window: Option<String>,
    /// Maximize baselines jointly with the excitation.
    #[arg(long = "mu-joint", conflicts_with = "tie_mu_wc")]
    pub mu_joint: bool,
    /// Output directory (default: $HAWKBIAS_OUT/estimate or ./estimate).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_numbers(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("{flag}: '{piece}' is not a number")))
        })
        .collect()
}

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    let text = output::read_text(&args.log)?;
    let log = EventLog64::from_jsonl_str(&text)
        .map_err(|err| CliError::usage(format!("{}: {err}", args.log.display())))?;

    let breakpoints = match &args.breakpoints {
        Some(text) => parse_numbers(text, "--breakpoints")?,
        None => Vec::new(),
    };
    let mu_mode = match &args.mu_from_window {
        Some(text) => {
            let bounds = parse_numbers(text, "--mu-from-window")?;
            if bounds.len() != 2 {
                return Err(CliError::usage(
                    "--mu-from-window expects exactly `start,end`".to_string(),
                ));
            }
            MuMode::FromWindow {
                start: bounds[0],
                end: bounds[1],
            }
        }
        None if args.mu_joint => MuMode::Joint,
        None => MuMode::PerWindow,
    };
    let options = WindowedOptions {
        mu_mode,
        tie_within_cross: args.tie_mu_wc,
    };
    let fits = estimate_windowed(&log, &breakpoints, args.beta, &options)
        .map_err(|err| CliError::usage(format!("estimation rejected the inputs: {err}")))?;

    if log.is_empty() {
        eprintln!("warning: log has no events; every fit is flagged low-data");
    }
    let converged = fits
        .iter()
        .flat_map(|fit| &fit.flags)
        .filter(|flag| **flag == FitStatus::Converged)
        .count();

    let dir = output::resolve_dir(args.out.clone(), "estimate");
    output::ensure_dir(&dir)?;
    let mut manifest = RunManifest::new(
        "estimate",
        serde_json::json!({
            "log": args.log.display().to_string(),
            "breakpoints": breakpoints,
            "beta": args.beta,
            "tie_mu_wc": args.tie_mu_wc,
            "mu_mode": format!("{mu_mode:?}"),
        }),
    )
    .with_input(args.log.display());
    output::write_json(&dir, manifest.output("fit.json"), &fits)?;
    output::write_text(
        &dir,
        manifest.output("regimes.csv"),
        &regime_table_csv(&fits),
    )?;
    output::write_text(
        &dir,
        manifest.output("bias_windowed.csv"),
        &bias_series_windowed(&fits, Some(&log)).to_csv(),
    )?;
    manifest.write(&dir)?;
    println!(
        "estimate: {} windows, {converged}/{} pair fits converged ({})",
        fits.len(),
        fits.len() * log.n_pairs(),
        dir.display()
    );
    Ok(())
}
