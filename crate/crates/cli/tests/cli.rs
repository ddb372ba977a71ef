use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zeno-transfer"));
    cmd.env_remove("ZENO_TRANSFER_OUT");
    cmd
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

#[test]
fn figure_writes_csv_script_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig2a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig2a.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,y,scheme,P1,P2,PR,Pleaked");
    assert!(dir.path().join("fig2a.gp").exists());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("fig2a.json")).unwrap()).unwrap();
    assert!(summary["scaling"].is_array());
}

#[test]
fn reruns_are_byte_identical_regardless_of_workers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run(&["figure", "fig3b", "--workers", "1"], a.path()).status.success());
    assert!(run(&["figure", "fig3b", "--workers", "4"], b.path()).status.success());
    for name in ["fig3b.csv", "fig3b.json", "fig3b.gp"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "--tau", "0.1", "--mode", "null"])
        .env("ZENO_TRANSFER_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("frequent"));
}

#[test]
fn config_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "schema_version": 1,
        "scenario": "custom",
        "system": { "e1": 0.0, "e2": 0.0, "e_r": 0.0, "gamma1": 1.0, "gamma2": 1.0, "lambda": 20.0 },
        "time_grid": { "t_max": 5.0, "points": 51 },
        "sweep": [1.0, 0.1],
        "output": { "stem": "mine" }
    }"#;
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, cfg).unwrap();
    let out = run(&["sweep", "--config", path.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("mine.csv")).unwrap();
    // header + 2 values × 2 schemes × 51 times
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 51);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{ "schema_version": 1, "scenario": "fig2a", "bogus": 3 }"#).unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    assert_eq!(run(&["figure", "fig9"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--lambda", "-1"], dir.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-validate", "--n", "100", "--w", "200", "--tmax", "10"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_validate_reports_a_small_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-validate", "--lambda", "5", "--n", "2000", "--w", "50", "--tmax", "10"], dir.path());
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert!(summary["sup_p1"].as_f64().unwrap() < 1e-2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sup|dP1|"));
}

#[test]
fn check_passes_on_a_correct_build() {
    let out = bin().arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 9, "{stdout}");
    assert!(out.status.success(), "{stdout}");
}
