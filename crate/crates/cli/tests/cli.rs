//! End-to-end tests of the `hawkbias` binary: exit codes, file outputs, and
//! byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hawkbias"))
}

/// Path of a config shipped with the crate.
fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = run(&[flag]);
        assert_eq!(out.status.code(), Some(0), "{flag} should exit 0");
    }
    let out = run(&["--help"]);
    assert!(stdout_of(&out).contains("simulate"));
}

#[test]
fn unknown_flag_and_subcommand_exit_one() {
    let out = run(&["simulate", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_across_reruns() {
    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    let cfg = config("three_regime.json");
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    }
    let events_a = fs::read(dir_a.path().join("events.jsonl")).unwrap();
    let events_b = fs::read(dir_b.path().join("events.jsonl")).unwrap();
    assert_eq!(
        events_a, events_b,
        "same config and seed must give identical logs"
    );

    // Manifests differ only in the --out path they record.
    let canon = |dir: &TempDir| {
        fs::read_to_string(dir.path().join("manifest.json"))
            .unwrap()
            .replace(dir.path().to_str().unwrap(), "OUT")
    };
    assert_eq!(canon(&dir_a), canon(&dir_b));
}

#[test]
fn simulate_rejects_nonpositive_horizon() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "simulate",
        "--config",
        config("three_regime.json").to_str().unwrap(),
        "--horizon",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("horizon"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn unknown_config_key_reports_line_and_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"k_groups\": 2,\n  \"mu\": [0.1, 0.1, 0.1],\n  \"excitation_diagonal\": [0, 0, 0],\n  \"beta\": 1.0,\n  \"horizon\": 5.0,\n  \"decay\": 1.0\n}\n")
        .unwrap();
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("decay"), "names the unknown key: {err}");
    assert!(
        err.contains("line 7"),
        "points at the offending line: {err}"
    );
}

#[test]
fn estimate_missing_log_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "estimate",
        "--log",
        dir.path().join("absent.jsonl").to_str().unwrap(),
        "--beta",
        "1.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn estimate_corrupt_log_names_the_line() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("events.jsonl");
    fs::write(&log, "{\"K\":2,\"horizon\":10.0}\nnot json\n").unwrap();
    let out = run(&[
        "estimate",
        "--log",
        log.to_str().unwrap(),
        "--beta",
        "1.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("line 2"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn simulate_then_estimate_pipeline() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    let est = dir.path().join("est");
    let out = run(&[
        "simulate",
        "--config",
        config("three_regime.json").to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let out = run(&[
        "estimate",
        "--log",
        sim.join("events.jsonl").to_str().unwrap(),
        "--breakpoints",
        "500,1000",
        "--beta",
        "1.0",
        "--mu-joint",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let fits = read_json(&est.join("fit.json"));
    let fits = fits.as_array().expect("fit.json is an array");
    assert_eq!(fits.len(), 3, "one fit per regime window");
    for fit in fits {
        assert_eq!(fit["alpha_hat"].as_array().unwrap().len(), 3);
    }
    // The active within stream is refit per window; its estimates must move
    // with the regime switches (0.40 -> 0.75 -> 0.50 ordering).
    let within: Vec<f64> = fits
        .iter()
        .map(|f| f["alpha_hat"][0].as_f64().unwrap())
        .collect();
    assert!(
        within[1] > within[0],
        "middle regime is the strongest: {within:?}"
    );
    assert!(
        within[1] > within[2],
        "middle regime is the strongest: {within:?}"
    );

    let regimes = fs::read_to_string(est.join("regimes.csv")).unwrap();
    assert!(regimes.starts_with("window_index,window_start,window_end,pair,"));
    assert_eq!(
        regimes.lines().count(),
        1 + 9,
        "header plus 3 windows x 3 pairs"
    );
    let series = fs::read_to_string(est.join("bias_windowed.csv")).unwrap();
    assert_eq!(
        series.lines().count(),
        1 + 6,
        "header plus 2 rows per window"
    );
}

#[test]
fn estimate_empty_log_warns_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("events.jsonl");
    fs::write(&log, "{\"K\":2,\"horizon\":10.0}\n").unwrap();
    let out = run(&[
        "estimate",
        "--log",
        log.to_str().unwrap(),
        "--beta",
        "1.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "empty input is a finding, not an error"
    );
    assert!(
        stderr_of(&out).contains("warning"),
        "stderr: {}",
        stderr_of(&out)
    );
    let fits = read_json(&dir.path().join("fit.json"));
    for flag in fits[0]["flags"].as_array().unwrap() {
        assert_eq!(flag, "low_data");
    }
}

#[test]
fn analyze_params_reports_stability_and_stationary_share() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "analyze",
        "--params",
        config("two_group.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let reports = read_json(&dir.path().join("stability.json"));
    let report = &reports[0]["report"];
    assert_eq!(report["regime"], "subcritical");
    let rho = report["rho"].as_f64().unwrap();
    assert!((0.55..0.65).contains(&rho), "rho = {rho}");
    let b_star = reports[0]["b_star"].as_f64().unwrap();
    assert!((0.80..0.85).contains(&b_star), "b_star = {b_star}");

    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,lambda_1-1,lambda_2-2,lambda_1-2"));
    assert!(dir.path().join("bias_meanfield.csv").exists());
}

#[test]
fn analyze_supercritical_is_a_detection_not_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("super.json");
    fs::write(
        &cfg,
        "{\"k_groups\":1,\"mu\":[1.0],\"excitation_diagonal\":[1.5],\"beta\":1.0,\"horizon\":10.0}",
    )
    .unwrap();
    let out = run(&[
        "analyze",
        "--params",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("supercritical"));
    let reports = read_json(&dir.path().join("stability.json"));
    assert_eq!(reports[0]["report"]["regime"], "supercritical");
    assert!(
        reports[0].get("b_star").is_none(),
        "no stationary rate above criticality"
    );
}

#[test]
fn analyze_verifies_decay_envelope() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "analyze",
        "--params",
        config("bound_schedule.json").to_str().unwrap(),
        "--verify-bound",
        "--safety",
        "0.9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let bound = read_json(&dir.path().join("bound.json"));
    assert_eq!(bound["pass"], true);
    assert_eq!(bound["safety"], 0.9);
    let margins = fs::read_to_string(dir.path().join("margins.csv")).unwrap();
    assert!(margins.starts_with("t,interval,distance,ratio,bound,margin"));
    assert!(margins.lines().count() > 100, "one row per grid point");
}

#[test]
fn analyze_rejects_bad_safety() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "analyze",
        "--params",
        config("bound_schedule.json").to_str().unwrap(),
        "--verify-bound",
        "--safety",
        "1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("safety"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn netsim_unknown_policy_lists_builtins() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "netsim",
        "--config",
        config("netsim3.json").to_str().unwrap(),
        "--policy",
        "pagerank",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    for name in [
        "cosine-static",
        "cosine-refit",
        "homophily-boost",
        "cross-boost",
        "group-blind-random",
    ] {
        assert!(err.contains(name), "stderr lists {name}: {err}");
    }
}

fn tiny_netsim_config(dir: &Path) -> PathBuf {
    let cfg = dir.join("tiny.json");
    fs::write(
        &cfg,
        r#"{
  "n_nodes": 40,
  "k_groups": 2,
  "prob_matrix": [[0.30, 0.05], [0.05, 0.30]],
  "top_probs": [0.3, 0.2, 0.1],
  "horizon_pre": 10,
  "horizon_lp": 15,
  "embedding_dim": 8,
  "n_clusters": 2,
  "seed": 5
}"#,
    )
    .unwrap();
    cfg
}

#[test]
fn netsim_writes_graph_log_audit_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = tiny_netsim_config(dir.path());
    let out = run(&[
        "netsim",
        "--config",
        cfg.to_str().unwrap(),
        "--policy",
        "cosine-refit",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    for name in [
        "edges.csv",
        "events.jsonl",
        "audit.csv",
        "bias_report.json",
        "manifest.json",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let report = read_json(&dir.path().join("bias_report.json"));
    assert_eq!(report["policy"], "cosine-refit");
    assert_eq!(report["seed"], 5);
    assert!(report["events"].as_u64().unwrap() > 0);
    let edges = fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert!(edges.starts_with("t,u,v,g_u,g_v"));
    let audit = fs::read_to_string(dir.path().join("audit.csv")).unwrap();
    assert!(audit.starts_with("t,u,candidates,scores,accepted"));
}

#[test]
fn netsim_seed_override_changes_the_run() {
    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    let cfg = tiny_netsim_config(dir_a.path());
    for (dir, seed) in [(&dir_a, "5"), (&dir_b, "6")] {
        let out = run(&[
            "netsim",
            "--config",
            cfg.to_str().unwrap(),
            "--policy",
            "group-blind-random",
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    }
    let log_a = fs::read(dir_a.path().join("events.jsonl")).unwrap();
    let log_b = fs::read(dir_b.path().join("events.jsonl")).unwrap();
    assert_ne!(log_a, log_b, "different seeds should give different runs");
}

#[test]
fn simulate_replicates_fan_out_and_summarize() {
    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "simulate",
            "--config",
            config("two_group.json").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--replicates",
            "3",
            "--jobs",
            "2",
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    }
    for k in 0..3 {
        let sub = dir_a.path().join(format!("rep{k:03}"));
        assert!(sub.join("events.jsonl").exists(), "missing rep{k:03}");
        assert!(sub.join("manifest.json").exists());
    }
    let summary_a = fs::read_to_string(dir_a.path().join("summary.csv")).unwrap();
    let summary_b = fs::read_to_string(dir_b.path().join("summary.csv")).unwrap();
    assert_eq!(
        summary_a, summary_b,
        "parallel fan-out must stay deterministic"
    );
    assert!(summary_a.starts_with("replicate,seed,events,b_emp"));
    assert_eq!(
        summary_a.lines().count(),
        1 + 3 + 1,
        "header, three rows, mean row"
    );
    let mean = summary_a.lines().last().unwrap();
    assert!(mean.starts_with("mean,,"));
}

#[test]
fn simulate_zero_replicates_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "simulate",
        "--config",
        config("two_group.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--replicates",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_env_var_sets_the_default_directory() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .args([
            "simulate",
            "--config",
            config("two_group.json").to_str().unwrap(),
        ])
        .env("HAWKBIAS_OUT", dir.path())
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(dir.path().join("simulate").join("events.jsonl").exists());
}

#[test]
fn reproduce_bound_margins_writes_verification() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "reproduce",
        "bound-margins",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let bound = read_json(&dir.path().join("bound.json"));
    assert_eq!(bound["pass"], true);
    assert!(dir.path().join("margins.csv").exists());
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "reproduce bound-margins");
}

#[test]
fn reproduce_unknown_target_exits_one() {
    let out = run(&["reproduce", "everything"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    for target in ["bias-timeline", "policy-sweep", "bound-margins"] {
        assert!(err.contains(target), "stderr lists {target}: {err}");
    }
}

#[test]
fn manifests_carry_no_clock_and_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run_once = || {
        let out = run(&[
            "reproduce",
            "bound-margins",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        fs::read(dir.path().join("manifest.json")).unwrap()
    };
    let first = run_once();
    std::thread::sleep(std::time::Duration::from_millis(1100));
    let second = run_once();
    assert_eq!(
        first, second,
        "a rerun a second later must reproduce every byte"
    );
}
