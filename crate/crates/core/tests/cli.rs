//! End-to-end tests of the compiled binary: exit codes, status lines, and
//! the files each subcommand leaves behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use vineyard_nav::cli::SEED_ENV_VAR;
use vineyard_nav::harness::{RUN_LOG_HEADER, SUMMARY_AGGREGATE_HEADER, SUMMARY_DETAIL_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_vineyard-nav");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn vineyard(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove(SEED_ENV_VAR)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = vineyard(&[]);
    assert_eq!(code_of(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("status=usage_error"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = vineyard(&["run", "--bogus"]);
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("status=usage_error"));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code_of(&vineyard(&["--help"])), 0);
    let version = vineyard(&["--version"]);
    assert_eq!(code_of(&version), 0);
    assert!(stdout_of(&version).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn run_writes_trial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let scenario = fixture("zero_noise.json");
    let out = vineyard(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--svg",
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let status = stdout_of(&out);
    assert!(status.starts_with("status=done arrivals=5 ticks="), "got: {status}");
    assert!(status.contains("seed=0"), "got: {status}");

    assert!(out_dir.join("trial_log.json").is_file());
    assert!(out_dir.join("trial.svg").is_file());
    let run_log = fs::read_to_string(out_dir.join("run_log.csv")).unwrap();
    assert_eq!(run_log.lines().next().unwrap(), RUN_LOG_HEADER);
    assert!(run_log.lines().count() > 100, "run log looks truncated");
}

#[test]
fn missing_scenario_file_is_a_usage_error() {
    let out = vineyard(&["run", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("status=usage_error"));
    assert!(stderr_of(&out).contains("/nonexistent/scenario.json"));
}

#[test]
fn unknown_override_key_names_the_token() {
    let out = vineyard(&["run", "--set", "camera.zoom=2"]);
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("status=usage_error"));
    assert!(stderr_of(&out).contains("camera.zoom"), "stderr: {}", stderr_of(&out));
}

#[test]
fn total_sensor_blackout_exits_search_failed() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("zero_noise.json");
    let out = vineyard(&[
        "experiment",
        "--scenario",
        scenario.to_str().unwrap(),
        "--set",
        "camera.miss_prob=1",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 3, "stdout: {}", stdout_of(&out));
    assert!(stdout_of(&out).contains("status=search_failed"));
}

#[test]
fn exhausted_tick_budget_exits_with_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("zero_noise.json");
    let out = vineyard(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--set",
        "max_ticks=10",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 4, "stdout: {}", stdout_of(&out));
    assert!(stdout_of(&out).contains("status=tick_budget_exceeded"));
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("blocked");
    fs::write(&blocked, "in the way").unwrap();
    let scenario = fixture("zero_noise.json");
    let out = vineyard(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        blocked.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 5, "stdout: {}", stdout_of(&out));
    assert!(stdout_of(&out).contains("status=io_error"));
}

#[test]
fn seed_env_var_applies_unless_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("zero_noise.json");
    let base: Vec<String> = vec![
        "run".into(),
        "--scenario".into(),
        scenario.to_str().unwrap().into(),
        "--out".into(),
        dir.path().join("out").to_str().unwrap().into(),
    ];

    let env_only = Command::new(BIN)
        .args(&base)
        .env(SEED_ENV_VAR, "123")
        .output()
        .unwrap();
    assert_eq!(code_of(&env_only), 0);
    assert!(stdout_of(&env_only).contains("seed=123"), "got: {}", stdout_of(&env_only));

    let flag_wins = Command::new(BIN)
        .args(&base)
        .args(["--seed", "9"])
        .env(SEED_ENV_VAR, "123")
        .output()
        .unwrap();
    assert_eq!(code_of(&flag_wins), 0);
    assert!(stdout_of(&flag_wins).contains("seed=9"), "got: {}", stdout_of(&flag_wins));

    let bad_env = Command::new(BIN)
        .args(&base)
        .env(SEED_ENV_VAR, "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code_of(&bad_env), 2);
    assert!(stdout_of(&bad_env).contains("status=usage_error"));
}

#[test]
fn experiment_outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("reference.json");
    let mut artifacts: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = vineyard(&[
            "experiment",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--svg",
        ]);
        assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
        let summary = fs::read(out_dir.join("summary.csv")).unwrap();
        let text = String::from_utf8(summary.clone()).unwrap();
        assert!(text.contains(SUMMARY_DETAIL_HEADER));
        assert!(text.contains(SUMMARY_AGGREGATE_HEADER));
        let svg = fs::read(out_dir.join("trial_0.svg")).unwrap();
        artifacts.push((summary, svg));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "summary.csv differs between runs");
    assert_eq!(artifacts[0].1, artifacts[1].1, "trial_0.svg differs between runs");
}

#[test]
fn replay_reproduces_the_run_svg_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let scenario = fixture("reference.json");
    let run = vineyard(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--svg",
    ]);
    assert_eq!(code_of(&run), 0, "stderr: {}", stderr_of(&run));

    let replay_svg = dir.path().join("replayed.svg");
    let replay = vineyard(&[
        "replay",
        "--log",
        out_dir.join("trial_log.json").to_str().unwrap(),
        "--out",
        replay_svg.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&replay), 0, "stderr: {}", stderr_of(&replay));
    assert!(stdout_of(&replay).starts_with("status=done out="));

    let original = fs::read(out_dir.join("trial.svg")).unwrap();
    let replayed = fs::read(&replay_svg).unwrap();
    assert_eq!(original, replayed, "replay SVG drifted from the original run");
}

#[test]
fn replay_rejects_files_that_are_not_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("bogus.json");
    fs::write(&bogus, "this is not json").unwrap();
    let out = vineyard(&[
        "replay",
        "--log",
        bogus.to_str().unwrap(),
        "--out",
        dir.path().join("x.svg").to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("status=usage_error"));
}

#[test]
fn every_bundled_scenario_completes() {
    for name in ["reference.json", "zero_noise.json", "two_row.json"] {
        let dir = tempfile::tempdir().unwrap();
        let scenario = fixture(name);
        let out = vineyard(&[
            "experiment",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ]);
        assert_eq!(code_of(&out), 0, "{name} stderr: {}", stderr_of(&out));
        let status = stdout_of(&out);
        assert!(status.starts_with("status=done "), "{name} got: {status}");
        assert!(status.contains("completion_rate=1"), "{name} got: {status}");
    }
}
