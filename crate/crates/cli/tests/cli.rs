use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pbm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PBM_WORKERS")
        .output()
        .expect("pbm runs")
}

fn summary(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("summary.jsonl")).unwrap();
    serde_json::from_str(text.lines().next().unwrap()).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn gold_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["gold"], dir.path());
    assert!(out.status.success());
    let s = summary(dir.path());
    assert!((num(&s, "d_over_dq") - 112.0).abs() <= 1.0);
    let report = std::fs::read_to_string(dir.path().join("gold.txt")).unwrap();
    assert!(report.contains("D / D_Q"));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "gold");
    assert!(manifest["config"]["bath"]["gamma0"].is_number());
    assert!(manifest["wall_time_seconds"].is_number());
}

#[test]
fn misspelled_key_in_file_names_nearest_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 3\n[bath]\ngama0 = 0.5\n").unwrap();
    let out = pbm(&["--config", cfg.to_str().unwrap(), "bath-check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown parameter"), "{err}");
    assert!(err.contains("bath.gamma0"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn malformed_override_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["--set", "bath.n_modes=lots", "bath-check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = pbm(&["--set", "bath.gamma0=-1", "bath-check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma0"));
}

#[test]
fn bath_check_defaults_resolve_the_kernel() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pbm(&["bath-check"], dir.path()).status.success());
    let s = summary(dir.path());
    assert!(num(&s, "kernel_max_error_rel_peak") <= 0.02);
    assert!(dir.path().join("kernel.csv").exists());
    assert!(dir.path().join("bath.toml").exists());
}

#[test]
fn coarse_step_is_a_numerical_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["--set", "dynamics.dt=0.1", "gle"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hint: try dt"));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "--set", "correlator.n_samples=3000", "correlator"];
    let mut with_one = args.to_vec();
    with_one.extend(["--workers", "1"]);
    let mut with_three = args.to_vec();
    with_three.extend(["--workers", "3"]);
    assert!(pbm(&with_one, a.path()).status.success());
    assert!(pbm(&with_three, b.path()).status.success());
    for file in ["correlator.csv", "summary.jsonl"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn sweep_without_values_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["sweep", "bath-check", "--axis", "bath.n_modes"], dir.path());
    assert!(out.status.success());
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn sweep_over_modes_reduces_kernel_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(
        &[
            "--set",
            "bath.cutoff=10",
            "--set",
            "bath_check.tau_max=20",
            "sweep",
            "bath-check",
            "--axis",
            "bath.n_modes",
            "--values",
            "25,50,100,200",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "kernel_max_error_rel_peak").unwrap();
    let errors: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
    assert!(dir.path().join("run_003/manifest.json").exists());
}

#[test]
fn sweep_over_temperature_keeps_correlator_floor() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(
        &[
            "--set",
            "correlator.n_samples=20000",
            "--set",
            "correlator.tau_max=3",
            "sweep",
            "correlator",
            "--axis",
            "thermal.temperature",
            "--values",
            "100,400",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = std::fs::read_to_string(dir.path().join("sweep.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let a = num(&lines[0], "zpf_constant");
    for s in &lines {
        let (floor, err) = (num(s, "floor_estimate"), num(s, "floor_estimate_std_error"));
        assert!((floor - a).abs() < 3.0 * err, "floor {floor} +- {err} vs {a}");
    }
}

#[test]
fn relax_and_kostin_runs_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["--set", "relax.t_end=0.5", "relax"], &dir.path().join("relax"));
    assert!(out.status.success());
    let s = summary(&dir.path().join("relax"));
    assert_eq!(s["h_monotone"], true);
    assert!(num(&s, "h_final") < num(&s, "h_initial"));

    let out = pbm(&["--set", "kostin.n_steps=1000", "kostin"], &dir.path().join("kostin"));
    assert!(out.status.success());
    let s = summary(&dir.path().join("kostin"));
    assert!(num(&s, "norm_drift") < 1e-9);
    assert!(dir.path().join("kostin/trajectories.csv").exists());
}

#[test]
fn check_mode_reports_each_item() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbm(&["check"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
    let failed = lines.iter().any(|l| l.starts_with("FAIL"));
    assert_eq!(out.status.code(), Some(if failed { 4 } else { 0 }));
}
