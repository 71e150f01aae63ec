//! End-to-end checks of the `pittrans` binary: subcommand wiring, output
//! files, and the documented exit-code mapping (0 success, 2 config or
//! input-file problems, 3 internal inconsistencies).

use std::path::Path;
use std::process::{Command, Output};

fn pittrans(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pittrans"))
        .args(args)
        .current_dir(dir)
        .env_remove("PITTRANS_THREADS")
        .output()
        .expect("binary runs")
}

const DEPOSIT_SPEC: &str = r#"{
  "grid": {"nx": 16, "ny": 16, "nz": 12, "dx": 30.0, "dy": 30.0, "dz": 30.0},
  "shell": {
    "center_i": 7.0, "center_j": 8.0, "center_k": 6.0,
    "radius_i": 5.0, "radius_j": 4.0, "radius_k": 6.0,
    "drift_i_per_level": 0.2, "drift_j_per_level": 0.0,
    "grade_min": 0.6, "grade_max": 2.4
  },
  "oxide_cap_levels": 3,
  "seed": 7
}"#;

fn scenario_json(mode: &str, out_dir: &str) -> String {
    format!(
        r#"{{
  "grid": {{"nx": 16, "ny": 16, "nz": 12, "dx": 30.0, "dy": 30.0, "dz": 30.0}},
  "block_model": "model.csv",
  "mode": "{mode}",
  "slope": {{"degrees": 45.0, "template_levels": 3}},
  "crown": {{"thickness_levels": 2}},
  "crown_shape": "flat-levels",
  "economics": {{"ug_discount": 1.0}},
  "output_dir": "{out_dir}"
}}"#
    )
}

fn setup_model(dir: &Path) {
    std::fs::write(dir.join("deposit.json"), DEPOSIT_SPEC).unwrap();
    let out = pittrans(
        &["gen-synthetic", "--spec", "deposit.json", "--out", "model.csv"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn optimize_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    std::fs::write(
        dir.path().join("scenario.json"),
        scenario_json("crown-shaped", "out"),
    )
    .unwrap();

    let out = pittrans(&["optimize", "--config", "scenario.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("crown-shaped"));
    for name in ["membership.csv", "pit_surface.csv", "summary.json", "slices.txt"] {
        assert!(dir.path().join("out").join(name).is_file(), "{name} missing");
    }
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(summary.get("pit_value").is_some());
    assert!(summary.get("total_value").is_some());
}

#[test]
fn compare_prints_one_row_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    for mode in ["pit-only", "conventional", "dual-identity"] {
        std::fs::write(
            dir.path().join(format!("{mode}.json")),
            scenario_json(mode, &format!("out-{mode}")),
        )
        .unwrap();
    }
    let out = Command::new(env!("CARGO_BIN_EXE_pittrans"))
        .args([
            "compare",
            "--config",
            "pit-only.json",
            "--config",
            "conventional.json",
            "--config",
            "dual-identity.json",
            "--out",
            "comparison.csv",
        ])
        .current_dir(dir.path())
        .env("PITTRANS_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pit-only"));
    assert!(stdout.contains("conventional"));
    assert!(stdout.contains("dual-identity"));
    let table = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 4); // header + 3 rows
}

#[test]
fn validate_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    std::fs::write(
        dir.path().join("scenario.json"),
        scenario_json("pit-only", "out"),
    )
    .unwrap();
    let out = pittrans(&["validate", "--config", "scenario.json"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 diagnostics"), "{stdout}");
}

#[test]
fn bad_config_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let out = pittrans(&["optimize", "--config", "broken.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_model_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("scenario.json"),
        scenario_json("pit-only", "out"),
    )
    .unwrap();
    let out = pittrans(&["optimize", "--config", "scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_model_row_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    // out-of-range block index
    let mut model = std::fs::read_to_string(dir.path().join("model.csv")).unwrap();
    model.push_str("99,99,99,100,0,0.00,1.00,,\n");
    std::fs::write(dir.path().join("model.csv"), model).unwrap();
    std::fs::write(
        dir.path().join("scenario.json"),
        scenario_json("pit-only", "out"),
    )
    .unwrap();
    let out = pittrans(&["optimize", "--config", "scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside grid"));
}

#[test]
fn crown_mode_without_crown_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    let config = scenario_json("crown-simple", "out").replace(
        "\"crown\": {\"thickness_levels\": 2},\n",
        "",
    );
    std::fs::write(dir.path().join("scenario.json"), config).unwrap();
    let out = pittrans(&["optimize", "--config", "scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_env_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    setup_model(dir.path());
    std::fs::write(
        dir.path().join("scenario.json"),
        scenario_json("pit-only", "out"),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pittrans"))
        .args(["compare", "--config", "scenario.json"])
        .current_dir(dir.path())
        .env("PITTRANS_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_synthetic_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("deposit.json"), DEPOSIT_SPEC).unwrap();
    for out in ["a.csv", "b.csv"] {
        let run = pittrans(
            &["gen-synthetic", "--spec", "deposit.json", "--out", out],
            dir.path(),
        );
        assert!(run.status.success());
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn internal_errors_map_to_exit_3() {
    // the mapping itself; real solves should never take this path
    assert_eq!(pittrans::Error::Inconsistency("x".into()).exit_code(), 3);
    assert_eq!(pittrans::Error::Config("x".into()).exit_code(), 2);
}
