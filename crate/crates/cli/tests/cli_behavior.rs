//! CLI contract tests: exit codes and output shapes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_certikit"))
}

#[test]
fn missing_eps_is_a_config_error() {
    let out = bin()
        .args(["certify", "--test", "mixedness", "--state", "mixed:4", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_test_and_backend_are_config_errors() {
    let out = bin()
        .args([
            "certify", "--test", "nope", "--state", "mixed:4", "--eps", "0.3", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args([
            "certify", "--test", "hs", "--state", "mixed:4", "--eps", "0.3", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "missing sigma should be a config error");
}

#[test]
fn unknown_suite_is_a_config_error() {
    let out = bin().args(["verify", "--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn distances_suite_passes() {
    let out = bin().args(["verify", "--suite", "distances"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn singular_reference_estimate_is_a_numerical_error() {
    let out = bin()
        .args([
            "estimate",
            "--quantity",
            "bures-chisq",
            "--state",
            "mixed:2",
            "--sigma",
            "basis:2:0",
            "--copies",
            "4",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn overlap_of_identical_diagonal_pure_states_is_one() {
    let out = bin()
        .args([
            "estimate",
            "--quantity",
            "overlap",
            "--state",
            "basis:3:1",
            "--sigma",
            "basis:3:1",
            "--copies",
            "2",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1.000000 +/- 0.000000"), "got: {text}");
}

#[test]
fn calibrate_with_zero_target_exhausts_the_grid() {
    let out = bin()
        .args([
            "calibrate",
            "--profile",
            "hs",
            "--target-error",
            "0",
            "--out",
            "/tmp/certikit-never-written.json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn certify_writes_report_files_and_summary() {
    let dir = std::env::temp_dir().join("certikit-cli-behavior");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("run");
    let out = bin()
        .args([
            "certify",
            "--test",
            "fidelity",
            "--state",
            "mixed:3",
            "--sigma",
            "mixed:3",
            "--eps",
            "0.3",
            "--trials",
            "2",
            "--seed",
            "11",
            "--backend",
            "analytic",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    assert!(csv.starts_with("trial,verdict,statistic,copies,seed\n"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["summary"]["ground_truth"], "close");
    // Wall time is reported on stderr, never in the files.
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall time"));
    assert!(json.get("wall_time").is_none());
}

#[test]
fn custom_constants_file_is_honored() {
    let dir = std::env::temp_dir().join("certikit-cli-behavior");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("constants.json");
    let mut constants = certikit::certify::Constants::builtin();
    constants.profiles.get_mut("mixedness").unwrap().c = 64.0;
    std::fs::write(&path, constants.to_json()).unwrap();
    let out = bin()
        .args([
            "certify",
            "--test",
            "mixedness",
            "--state",
            "mixed:4",
            "--eps",
            "0.3",
            "--trials",
            "1",
            "--seed",
            "3",
            "--constants",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    // n = ceil(64 * max(2/(gamma theta), 4/(gamma^2 theta))) at theta 0.09.
    assert!(text.contains("n=2962"), "got: {text}");
}
