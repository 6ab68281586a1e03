//! Exercises the C ABI from Rust: handle lifecycle, status codes, NULL
//! tolerance, and agreement with the core library. A final test compiles
//! and runs a real C client against the generated header when a C compiler
//! is available.

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;
use vineyard_nav_ffi::*;

fn c_str(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn borrow_c<'a>(p: *const std::ffi::c_char) -> &'a str {
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap()
}

#[test]
fn version_matches_the_core_library() {
    let v = unsafe { borrow_c(vn_version()) };
    assert_eq!(v, vineyard_nav::VERSION);
}

#[test]
fn default_scenario_runs_to_completion() {
    unsafe {
        let scenario = vn_scenario_default();
        assert!(!scenario.is_null());
        assert_eq!(vn_scenario_set_seed(scenario, 7), VnStatus::Ok);

        let mut status = VnStatus::Io;
        let summary = vn_run_experiment(scenario, &mut status);
        assert_eq!(status, VnStatus::Ok);
        assert!(!summary.is_null());

        assert_eq!(vn_summary_trial_count(summary), 10);
        assert_eq!(vn_summary_arrival_count(summary), 50);
        assert_eq!(vn_summary_completion_rate(summary), 1.0);
        let mean = vn_summary_mean_error_m(summary);
        assert!(mean > 0.0 && mean < 0.06, "mean {mean}");
        let std = vn_summary_std_error_m(summary);
        assert!(std.is_finite() && std >= 0.0);

        vn_summary_free(summary);
        vn_scenario_free(scenario);
    }
}

#[test]
fn malformed_json_reports_parse_status() {
    unsafe {
        let bad = c_str("{ this is not json");
        let mut status = VnStatus::Ok;
        let scenario = vn_scenario_from_json(bad.as_ptr(), &mut status);
        assert!(scenario.is_null());
        assert_eq!(status, VnStatus::Parse);
        let message = borrow_c(vn_last_error_message());
        assert!(message.contains("scenario JSON"), "got: {message}");

        // Unknown keys are also parse failures (the schema is closed).
        let unknown = c_str(r#"{ "cameraa": {} }"#);
        let scenario = vn_scenario_from_json(unknown.as_ptr(), &mut status);
        assert!(scenario.is_null());
        assert_eq!(status, VnStatus::Parse);
    }
}

#[test]
fn invalid_config_values_report_invalid_argument() {
    unsafe {
        let zero_trials = c_str(r#"{ "n_trials": 0 }"#);
        let mut status = VnStatus::Ok;
        let scenario = vn_scenario_from_json(zero_trials.as_ptr(), &mut status);
        assert!(scenario.is_null());
        assert_eq!(status, VnStatus::InvalidArgument);
        let message = borrow_c(vn_last_error_message());
        assert!(message.contains("invalid config"), "got: {message}");
    }
}

#[test]
fn null_handles_are_tolerated_everywhere() {
    unsafe {
        assert!(vn_summary_mean_error_m(ptr::null()).is_nan());
        assert!(vn_summary_std_error_m(ptr::null()).is_nan());
        assert!(vn_summary_completion_rate(ptr::null()).is_nan());
        assert_eq!(vn_summary_arrival_count(ptr::null()), 0);
        assert_eq!(vn_summary_trial_count(ptr::null()), 0);
        assert!(vn_scenario_to_json(ptr::null()).is_null());
        assert!(vn_summary_to_json(ptr::null()).is_null());

        assert_eq!(vn_scenario_set_seed(ptr::null_mut(), 1), VnStatus::InvalidArgument);
        assert_eq!(vn_scenario_set_work_side(ptr::null_mut(), 0), VnStatus::InvalidArgument);
        assert_eq!(vn_scenario_set_trials(ptr::null_mut(), 1), VnStatus::InvalidArgument);
        assert_eq!(
            vn_summary_write_csv(ptr::null(), c_str("/tmp/x.csv").as_ptr()),
            VnStatus::InvalidArgument
        );

        let mut status = VnStatus::Ok;
        assert!(vn_scenario_from_json(ptr::null(), &mut status).is_null());
        assert_eq!(status, VnStatus::InvalidArgument);
        assert!(vn_run_experiment(ptr::null(), &mut status).is_null());
        assert_eq!(status, VnStatus::InvalidArgument);

        // Status out-pointer itself may be NULL.
        let s = vn_scenario_default();
        let summary = vn_run_experiment(s, ptr::null_mut());
        assert!(!summary.is_null());
        vn_summary_free(summary);
        vn_scenario_free(s);

        vn_scenario_free(ptr::null_mut());
        vn_summary_free(ptr::null_mut());
        vn_string_free(ptr::null_mut());
    }
}

#[test]
fn work_side_setter_validates_and_applies() {
    unsafe {
        let scenario = vn_scenario_default();
        assert_eq!(vn_scenario_set_work_side(scenario, 2), VnStatus::InvalidArgument);
        assert_eq!(vn_scenario_set_work_side(scenario, -1), VnStatus::InvalidArgument);
        assert_eq!(vn_scenario_set_work_side(scenario, 0), VnStatus::Ok);

        let json = vn_scenario_to_json(scenario);
        let text = borrow_c(json).to_owned();
        vn_string_free(json);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["nav"]["work_side"], "L");

        assert_eq!(vn_scenario_set_work_side(scenario, 1), VnStatus::Ok);
        vn_scenario_free(scenario);
    }
}

#[test]
fn trial_count_setter_rejects_zero() {
    unsafe {
        let scenario = vn_scenario_default();
        assert_eq!(vn_scenario_set_trials(scenario, 0), VnStatus::InvalidArgument);
        assert_eq!(vn_scenario_set_trials(scenario, 3), VnStatus::Ok);

        let mut status = VnStatus::Io;
        let summary = vn_run_experiment(scenario, &mut status);
        assert_eq!(status, VnStatus::Ok);
        assert_eq!(vn_summary_trial_count(summary), 3);
        assert_eq!(vn_summary_arrival_count(summary), 15);
        vn_summary_free(summary);
        vn_scenario_free(scenario);
    }
}

#[test]
fn scenario_json_round_trips_through_the_abi() {
    unsafe {
        let a = vn_scenario_default();
        let json_a = vn_scenario_to_json(a);
        let text_a = borrow_c(json_a).to_owned();

        let mut status = VnStatus::Io;
        let b = vn_scenario_from_json(json_a, &mut status);
        assert_eq!(status, VnStatus::Ok);
        let json_b = vn_scenario_to_json(b);
        assert_eq!(text_a, borrow_c(json_b));

        vn_string_free(json_a);
        vn_string_free(json_b);
        vn_scenario_free(a);
        vn_scenario_free(b);
    }
}

#[test]
fn csv_export_agrees_with_the_library_reader() {
    unsafe {
        let scenario = vn_scenario_default();
        assert_eq!(vn_scenario_set_seed(scenario, 21), VnStatus::Ok);
        let mut status = VnStatus::Io;
        let summary = vn_run_experiment(scenario, &mut status);
        assert_eq!(status, VnStatus::Ok);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let c_path = c_str(path.to_str().unwrap());
        assert_eq!(vn_summary_write_csv(summary, c_path.as_ptr()), VnStatus::Ok);

        let parsed = vineyard_nav::harness::read_summary_csv(&path).unwrap();
        assert_eq!(parsed.n_arrivals as u64, vn_summary_arrival_count(summary));
        assert_eq!(parsed.mean_error_m, vn_summary_mean_error_m(summary));
        assert_eq!(parsed.std_pop_m, vn_summary_std_error_m(summary));
        assert_eq!(parsed.completion_rate, vn_summary_completion_rate(summary));
        assert_eq!(parsed.rows.len(), parsed.n_arrivals);

        // Writing into a directory that does not exist is an I/O error.
        let missing = c_str(dir.path().join("no/such/dir/x.csv").to_str().unwrap());
        assert_eq!(vn_summary_write_csv(summary, missing.as_ptr()), VnStatus::Io);

        vn_summary_free(summary);
        vn_scenario_free(scenario);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    unsafe {
        let render = || {
            let scenario = vn_scenario_default();
            assert_eq!(vn_scenario_set_seed(scenario, 5), VnStatus::Ok);
            let mut status = VnStatus::Io;
            let summary = vn_run_experiment(scenario, &mut status);
            assert_eq!(status, VnStatus::Ok);
            let json = vn_summary_to_json(summary);
            let text = borrow_c(json).to_owned();
            vn_string_free(json);
            vn_summary_free(summary);
            vn_scenario_free(scenario);
            text
        };
        assert_eq!(render(), render());
    }
}

#[test]
fn failed_searches_surface_through_status_and_message() {
    unsafe {
        let blind = c_str(r#"{ "camera": { "miss_prob": 1.0 }, "n_trials": 2 }"#);
        let mut status = VnStatus::Ok;
        let scenario = vn_scenario_from_json(blind.as_ptr(), &mut status);
        assert_eq!(status, VnStatus::Ok);

        let summary = vn_run_experiment(scenario, &mut status);
        assert_eq!(status, VnStatus::SearchFailed);
        assert!(!summary.is_null(), "summary stays inspectable on failure");
        assert_eq!(vn_summary_completion_rate(summary), 0.0);
        assert_eq!(vn_summary_arrival_count(summary), 0);
        let message = borrow_c(vn_last_error_message());
        assert!(message.contains("trial 0"), "got: {message}");

        vn_summary_free(summary);
        vn_scenario_free(scenario);
    }
}

#[test]
fn generated_header_declares_the_full_api() {
    let header_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/vineyard_nav.h");
    let header = std::fs::read_to_string(&header_path).expect("header generated by build.rs");
    for needle in [
        "#ifndef VINEYARD_NAV_H",
        "typedef struct VnScenario VnScenario;",
        "typedef struct VnSummary VnSummary;",
        "VN_STATUS_OK = 0",
        "VN_STATUS_IO = 5",
        "vn_version",
        "vn_last_error_message",
        "vn_scenario_default",
        "vn_scenario_from_json",
        "vn_scenario_to_json",
        "vn_scenario_set_seed",
        "vn_scenario_set_work_side",
        "vn_scenario_set_trials",
        "vn_scenario_free",
        "vn_run_experiment",
        "vn_summary_mean_error_m",
        "vn_summary_std_error_m",
        "vn_summary_completion_rate",
        "vn_summary_arrival_count",
        "vn_summary_trial_count",
        "vn_summary_write_csv",
        "vn_summary_to_json",
        "vn_summary_free",
        "vn_string_free",
    ] {
        assert!(header.contains(needle), "header missing: {needle}");
    }
}

/// Compiles and runs an actual C client against the header and staticlib.
/// Skipped silently when no C compiler is on PATH.
#[test]
fn c_client_links_and_runs() {
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .map(|o| o.status.success())
                .unwrap_or(false)
        })
        .copied();
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping");
        return;
    };

    // target/<profile>/ next to this test executable (…/target/<profile>/deps/capi-*).
    let mut lib_dir = std::env::current_exe().unwrap();
    lib_dir.pop();
    if lib_dir.ends_with("deps") {
        lib_dir.pop();
    }
    let staticlib = lib_dir.join("libvineyard_nav_ffi.a");
    assert!(staticlib.is_file(), "staticlib not built at {}", staticlib.display());
    let include_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "vineyard_nav.h"

int main(void) {
    if (!vn_version()) return 1;
    VnScenario *s = vn_scenario_default();
    if (!s) return 2;
    if (vn_scenario_set_seed(s, 7) != VN_STATUS_OK) return 3;
    VnStatus st = VN_STATUS_IO;
    VnSummary *sum = vn_run_experiment(s, &st);
    if (!sum || st != VN_STATUS_OK) return 4;
    if (vn_summary_trial_count(sum) != 10) return 5;
    if (vn_summary_arrival_count(sum) != 50) return 6;
    double mean = vn_summary_mean_error_m(sum);
    if (!(mean > 0.0 && mean < 0.06)) return 7;
    char *json = vn_summary_to_json(sum);
    if (!json || strlen(json) < 2) return 8;
    vn_string_free(json);
    vn_summary_free(sum);
    vn_scenario_free(s);
    vn_scenario_free(NULL);
    vn_summary_free(NULL);
    vn_string_free(NULL);
    printf("c-smoke ok mean=%.6f\n", mean);
    return 0;
}
"#,
    )
    .unwrap();

    let exe = dir.path().join("smoke");
    let compile = std::process::Command::new(cc)
        .arg(&src)
        .arg(&staticlib)
        .arg(format!("-I{}", include_dir.display()))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = std::process::Command::new(&exe).output().unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("c-smoke ok mean="));
}
