//! Concurrent replicate execution with deterministic reduction.
//!
//! Replicate `k` always runs with seed `base_seed + k` into `rep{k:03}/`, so
//! the work distribution across jobs never changes the results — only the
//! wall-clock time. The reducer consumes summaries in replicate order.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::CliError;
use crate::output;

/// One replicate's working directory and seed.
pub struct Slot {
    pub seed: u64,
    pub dir: PathBuf,
}

/// Validates `--replicates`/`--jobs` and whether the command supports them.
pub fn check_counts(replicates: usize, jobs: usize) -> Result<(), CliError> {
    if replicates == 0 {
        return Err(CliError::usage(
            "--replicates must be at least 1".to_string(),
        ));
    }
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1".to_string()));
    }
    Ok(())
}

/// Runs `work` once per replicate on up to `jobs` worker threads and returns
/// the summaries in replicate order.
///
/// With a single replicate the base directory itself is the slot; otherwise
/// each replicate gets a zero-padded subdirectory.
pub fn run<S: Send>(
    base_dir: &Path,
    base_seed: u64,
    replicates: usize,
    jobs: usize,
    work: impl Fn(&Slot) -> Result<S, CliError> + Sync,
) -> Result<Vec<S>, CliError> {
    if replicates == 1 {
        let slot = Slot {
            seed: base_seed,
            dir: base_dir.to_path_buf(),
        };
        return Ok(vec![work(&slot)?]);
    }
    let slots: Vec<Slot> = (0..replicates)
        .map(|k| Slot {
            seed: base_seed + k as u64,
            dir: base_dir.join(format!("rep{k:03}")),
        })
        .collect();
    for slot in &slots {
        output::ensure_dir(&slot.dir)?;
    }
    let results: Vec<Mutex<Option<Result<S, CliError>>>> =
        (0..replicates).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(replicates) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= replicates {
                    break;
                }
                let outcome = work(&slots[k]);
                *results[k].lock().expect("no poisoned result slot") = Some(outcome);
            });
        }
    });
    // First failure in replicate order wins, keeping errors deterministic too.
    let mut summaries = Vec::with_capacity(replicates);
    for cell in results {
        let outcome = cell
            .into_inner()
            .expect("no poisoned result slot")
            .expect("every replicate ran");
        summaries.push(outcome?);
    }
    Ok(summaries)
}

/// Renders a summary CSV: one row per replicate plus a `mean` row over the
/// numeric columns. Non-finite values become empty fields.
pub fn summary_csv(header: &[&str], rows: &[Vec<f64>], seeds: &[u64]) -> String {
    let cell = |value: f64| {
        if value.is_finite() {
            format!(",{value}")
        } else {
            ",".to_string()
        }
    };
    let mut out = String::from("replicate,seed,");
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        out.push_str(&format!("{k},{}", seeds[k]));
        for &value in row {
            out.push_str(&cell(value));
        }
        out.push('\n');
    }
    if rows.len() > 1 {
        out.push_str("mean,");
        let n = rows.len() as f64;
        for col in 0..header.len() {
            let mean = rows.iter().map(|r| r[col]).sum::<f64>() / n;
            out.push_str(&cell(mean));
        }
        out.push('\n');
    }
    out
}
