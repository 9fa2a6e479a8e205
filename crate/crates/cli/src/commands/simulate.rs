//! `simulate`: event-log generation from a process config.

use std::path::PathBuf;

use hawkbias::bias::empirical_bias;
use hawkbias::process::simulate;

use crate::config::{self, ProcessConfig};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output;
use crate::replicate;

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Process config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: $HAWKBIAS_OUT/simulate or ./simulate).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config horizon.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent replicates (seeds base, base+1, ...).
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Worker threads for replicates.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    replicate::check_counts(args.replicates, args.jobs)?;
    let cfg: ProcessConfig = config::load(&args.config)?;
    let params = cfg.params()?;
    let schedule = cfg.schedule()?;
    let mode = cfg.regime_mode()?;
    let horizon = cfg.resolve_horizon(args.horizon)?;
    let base_seed = cfg.resolve_seed(args.seed);

    let dir = output::resolve_dir(args.out.clone(), "simulate");
    output::ensure_dir(&dir)?;

    let summaries = replicate::run(&dir, base_seed, args.replicates, args.jobs, |slot| {
        let log = simulate(&params, schedule.as_ref(), mode, horizon, slot.seed)
            .map_err(CliError::numerical)?;
        let mut manifest = RunManifest::new("simulate", cfg.snapshot())
            .with_seed(slot.seed)
            .with_input(args.config.display());
        output::write_text(
            &slot.dir,
            manifest.output("events.jsonl"),
            &log.to_jsonl_string(),
        )?;
        manifest.write(&slot.dir)?;
        let share = empirical_bias(&log, horizon).unwrap_or(f64::NAN);
        println!(
            "simulate: seed {} -> {} events over horizon {horizon} ({})",
            slot.seed,
            log.len(),
            slot.dir.display()
        );
        Ok(vec![log.len() as f64, share])
    })?;

    if args.replicates > 1 {
        let seeds: Vec<u64> = (0..args.replicates).map(|k| base_seed + k as u64).collect();
        let csv = replicate::summary_csv(&["events", "b_emp"], &summaries, &seeds);
        let mut manifest = RunManifest::new("simulate", cfg.snapshot())
            .with_seed(base_seed)
            .with_input(args.config.display());
        output::write_text(&dir, manifest.output("summary.csv"), &csv)?;
        manifest.write(&dir)?;
    }
    Ok(())
}
