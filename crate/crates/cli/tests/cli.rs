use std::path::Path;
use std::process::{Command, Output};

use reasonlab_cli::{demos, Check, Phase, Report, DEMOS};
use tempfile::TempDir;

fn reasonlab(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_reasonlab"));
    cmd.args(args).env_remove("REASONLAB_SEED");
    if let Some(s) = seed {
        cmd.env("REASONLAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn run_to_report(dir: &TempDir, scenario: &str, extra: &[&str]) -> (i32, Report, String) {
    let out = dir.path().join("report.json");
    let mut args = vec!["run", scenario, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = reasonlab(&args, None);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let report = Report::from_json(&text).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    (o.status.code().unwrap(), report, text)
}

#[test]
fn identity_passes_every_check() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "identity.json",
        r#"{"schema": 1, "name": "identity", "system": {"kind": "identity"}, "n_samples": 32,
            "checks": ["coherence", "soundness", "completeness", "fixedpoint", "failures", "joint"]}"#,
    );
    let (code, report, _) = run_to_report(&dir, &s, &["--no-timestamp"]);
    assert_eq!(code, 0);
    assert!(report.pass);
    let joint = report.check(Check::Joint, Phase::Initial).unwrap();
    assert_eq!(joint.detail["combination"], "TTT");
    assert_eq!(report.label_count("Healthy"), 32);
}

#[test]
fn offset_fails_coherence_with_worst_case_one() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "offset.json",
        r#"{"schema": 1, "system": {"kind": "offset", "offset": 1.0}, "n_samples": 16,
            "tolerances": {"coherence_tol": 0.5}, "checks": ["coherence"]}"#,
    );
    let (code, report, _) = run_to_report(&dir, &s, &["--no-timestamp"]);
    assert_eq!(code, 1);
    let c = report.check(Check::Coherence, Phase::Initial).unwrap();
    assert!(!c.pass);
    assert_eq!(c.detail["worst_case"], 1.0);
}

#[test]
fn checks_run_in_declared_order() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "order.json",
        r#"{"schema": 1, "system": {"kind": "identity"}, "n_samples": 4,
            "checks": ["joint", "coherence", "failures"]}"#,
    );
    let (_, report, _) = run_to_report(&dir, &s, &[]);
    let order: Vec<Check> = report.checks.iter().map(|c| c.check).collect();
    assert_eq!(order, vec![Check::Joint, Check::Coherence, Check::Failures]);
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    for demo in &DEMOS {
        let a = reasonlab(&["demo", demo.name, "--no-timestamp"], None);
        let b = reasonlab(&["demo", demo.name, "--no-timestamp"], None);
        assert_eq!(a.stdout, b.stdout, "{}", demo.name);
        assert!(!String::from_utf8_lossy(&a.stdout).contains("timestamp"));
    }
    let stamped = reasonlab(&["demo", "deadlock"], None);
    let report = Report::from_json(&String::from_utf8_lossy(&stamped.stdout)).unwrap();
    assert!(report.timestamp.is_some());
}

#[test]
fn reports_round_trip() {
    for demo in &DEMOS {
        let o = reasonlab(&["demo", demo.name, "--no-timestamp"], None);
        let text = String::from_utf8(o.stdout).unwrap();
        let report = Report::from_json(&text).unwrap();
        assert_eq!(Report::from_json(&report.to_json()).unwrap(), report);
        assert_eq!(report.to_json(), text);
    }
}

#[test]
fn deadlock_demo_labels_every_sample() {
    let o = reasonlab(&["demo", "deadlock", "--no-timestamp"], None);
    assert_eq!(o.status.code(), Some(1));
    let report = Report::from_json(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(report.label_count("Deadlock"), report.n_samples);
}

#[test]
fn demos_table_lists_seven_topics() {
    let o = reasonlab(&["demos"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for (row, demo) in rows.iter().zip(&DEMOS) {
        assert!(row.starts_with(demo.name));
        assert!(row.contains("Failure modes /") || row.contains("Dynamics /"), "{row}");
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "seeded.json",
        r#"{"schema": 1, "system": {"kind": "offset", "offset": 0.2}, "seed": 5, "n_samples": 8, "checks": ["coherence"]}"#,
    );
    let base = Report::from_json(&String::from_utf8_lossy(&reasonlab(&["run", &s, "--no-timestamp"], None).stdout)).unwrap();
    assert_eq!(base.seed, 5);
    let o = reasonlab(&["run", &s, "--no-timestamp"], Some("0x10"));
    let over = Report::from_json(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(over.seed, 16);
    assert_ne!(base.checks[0].detail, over.checks[0].detail);
    assert_eq!(reasonlab(&["run", &s], Some("not-a-seed")).status.code(), Some(2));
}

#[test]
fn execution_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("empty_checks.json", r#"{"schema": 1, "system": {"kind": "identity"}, "n_samples": 4, "checks": []}"#),
        ("bad_schema.json", r#"{"schema": 7, "system": {"kind": "identity"}, "n_samples": 4, "checks": ["coherence"]}"#),
        ("unknown_system.json", r#"{"schema": 1, "system": {"kind": "quantum"}, "n_samples": 4, "checks": ["coherence"]}"#),
        (
            "missing_file.json",
            r#"{"schema": 1, "system": {"kind": "opt", "problem_file": "absent.txt"}, "n_samples": 4, "checks": ["soundness"]}"#,
        ),
        (
            "bad_formula.json",
            r#"{"schema": 1, "system": {"kind": "logic", "premises": [["A &"]], "depth_bound": 2}, "n_samples": 4, "checks": ["soundness"]}"#,
        ),
        (
            "no_adapter.json",
            r#"{"schema": 1, "system": {"kind": "identity"}, "n_samples": 4, "checks": ["coherence"],
                "dynamics": {"adapt": {"rounds": 3, "calibration": 4}}}"#,
        ),
        ("not_json.json", "{"),
    ];
    for (name, text) in cases {
        let s = write(&dir, name, text);
        let o = reasonlab(&["run", &s], None);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{name}");
    }
    assert_eq!(reasonlab(&["run", "/no/such/scenario.json"], None).status.code(), Some(2));
    assert_eq!(reasonlab(&["demo", "no-such-demo"], None).status.code(), Some(2));
}

#[test]
fn parameter_files_resolve_relative_to_the_scenario() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("params")).unwrap();
    std::fs::write(dir.path().join("params/chain.txt"), "# chained\nA\nA -> B\nB -> C\n").unwrap();
    std::fs::write(dir.path().join("params/qp.txt"), "schema 1\nQ\n2 0\n0 2\nc\n-2 4\nbox\n-inf 0.5\n-1 1\n").unwrap();
    let logic = write(
        &dir,
        "logic.json",
        r#"{"schema": 1, "system": {"kind": "logic", "premise_files": ["params/chain.txt"], "depth_bound": 1, "targets": ["C"]},
            "n_samples": 1, "checks": ["completeness"]}"#,
    );
    let (code, report, _) = run_to_report(&dir, &logic, &[]);
    assert_eq!(code, 1);
    assert_eq!(report.check(Check::Completeness, Phase::Initial).unwrap().detail["failing_samples"][0]["phenomenon"][2], "B -> C");

    let opt = write(
        &dir,
        "opt.json",
        r#"{"schema": 1, "system": {"kind": "opt", "problem_file": "params/qp.txt",
            "phenomena": {"kind": "fixed", "c": [[-2, 4], [1, 1]]}}, "n_samples": 2, "checks": ["soundness", "completeness"]}"#,
    );
    let (code, _, _) = run_to_report(&dir, &opt, &[]);
    assert_eq!(code, 0);
}

#[test]
fn neural_weights_file_replaces_initial_weights() {
    let dir = TempDir::new().unwrap();
    // Identity weights on 2 dimensions reconstruct exactly.
    std::fs::write(
        dir.path().join("w.txt"),
        "schema 1\nW_enc\n1 0\n0 1\nW_dec\n1 0\n0 1\nparams\n0.05 10\n",
    )
    .unwrap();
    let s = write(
        &dir,
        "neural.json",
        r#"{"schema": 1, "system": {"kind": "neural", "config": {"data": {"dim": 2, "rank": 2}, "code_dim": 2},
            "weights_file": "w.txt"}, "n_samples": 8, "checks": ["coherence", "soundness"]}"#,
    );
    let (code, report, _) = run_to_report(&dir, &s, &[]);
    assert_eq!(code, 0, "{}", report.render());
}

#[test]
fn dynamics_sections_are_reported() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "train.json",
        r#"{"schema": 1, "system": {"kind": "neural"}, "n_samples": 8, "checks": ["coherence"],
            "dynamics": {"adapt": {"rounds": 20, "calibration": 16}, "epochs": 3, "iterate": {"from_sample": 2}}}"#,
    );
    let (_, report, _) = run_to_report(&dir, &s, &[]);
    let adaptation = report.adaptation.as_ref().unwrap();
    assert_eq!(adaptation["epochs"].as_array().unwrap().len(), 3);
    assert_eq!(adaptation["log"].as_array().unwrap().len(), 4);
    assert_eq!(adaptation["response_mode"], "Adaptive");
    assert!(report.iterate.is_some());

    let s = write(
        &dir,
        "iterate.json",
        r#"{"schema": 1, "system": {"kind": "identity"}, "n_samples": 4, "checks": ["coherence"],
            "dynamics": {"iterate": {"start": 0.25}}}"#,
    );
    let (_, report, _) = run_to_report(&dir, &s, &[]);
    let it = report.iterate.unwrap();
    assert_eq!(it["outcome"]["Converged"]["steps"], 1);
    assert_eq!(it["final"], 0.25);
}

#[test]
fn contradiction_demo_flips_after_relaxation() {
    let demo = demos::find("contradiction").unwrap();
    let report = reasonlab_cli::run_scenario(&demo.scenario().unwrap(), Default::default()).unwrap();
    assert!(!report.check(Check::Soundness, Phase::Initial).unwrap().pass);
    assert!(report.check(Check::Soundness, Phase::PostDrift).unwrap().pass);
    let drift = report.drift.as_ref().unwrap();
    assert_eq!(drift["replay_matches"], true);
    assert_eq!(drift["triggers"][0]["principle"], "consistency");
    assert_eq!(drift["principles_after"][0]["severity"], "Soft");
    assert!(Path::new(env!("CARGO_MANIFEST_DIR")).join("demos/contradiction.json").is_file());
}
