//! C ABI for the row-navigation simulator.
//!
//! Handles (`VnScenario`, `VnSummary`) are opaque heap allocations owned by
//! the caller; every `vn_*_free` accepts NULL. Strings returned as
//! `char *` must be released with `vn_string_free`; `const char *` returns
//! (version, last error) are borrowed and must not be freed.
//!
//! Failure details are stored per thread and readable via
//! `vn_last_error_message` until the next failing call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::Path;
use std::sync::OnceLock;
use vineyard_nav::harness::{
    export_summary, run_trials, ExperimentSummary, Scenario, ScenarioError, TerminalStatus,
};
use vineyard_nav::world::Side;

/// Result of an API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnStatus {
    Ok = 0,
    /// NULL pointer, non-UTF-8 string, or a value out of range.
    InvalidArgument = 1,
    /// Scenario JSON did not parse.
    Parse = 2,
    /// A trial could not confirm enough trunks to fit the working row.
    SearchFailed = 3,
    /// A trial hit its tick budget before finishing.
    BudgetExceeded = 4,
    /// Writing an output file failed.
    Io = 5,
}

/// Opaque simulation configuration handle.
pub struct VnScenario(Scenario);

/// Opaque experiment result handle.
pub struct VnSummary(ExperimentSummary);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into();
    // Interior NULs cannot come from our error paths; replace defensively.
    let c = CString::new(message.replace('\0', "?")).expect("NUL-free error string");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn write_status(out: *mut VnStatus, status: VnStatus) {
    if !out.is_null() {
        unsafe { *out = status };
    }
}

/// Borrowed library version string, valid for the process lifetime.
#[no_mangle]
pub extern "C" fn vn_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(vineyard_nav::VERSION).expect("NUL-free version"))
        .as_ptr()
}

/// Message for the most recent failure on this thread, or NULL if none.
/// The pointer is invalidated by the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    })
}

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by a `vn_*` function
/// that documents `vn_string_free` as its deallocator, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// New scenario with the built-in defaults (single row of five trunks,
/// ten trials). Free with `vn_scenario_free`.
#[no_mangle]
pub extern "C" fn vn_scenario_default() -> *mut VnScenario {
    Box::into_raw(Box::new(VnScenario(Scenario::default())))
}

/// Parses a scenario from JSON. Returns NULL on failure and reports the
/// reason through `status` and `vn_last_error_message`.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `status` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_from_json(
    json: *const c_char,
    status: *mut VnStatus,
) -> *mut VnScenario {
    if json.is_null() {
        set_last_error("json is NULL");
        write_status(status, VnStatus::InvalidArgument);
        return std::ptr::null_mut();
    }
    let text = match unsafe { CStr::from_ptr(json) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("json is not valid UTF-8");
            write_status(status, VnStatus::InvalidArgument);
            return std::ptr::null_mut();
        }
    };
    match Scenario::from_json_str(text) {
        Ok(scenario) => {
            write_status(status, VnStatus::Ok);
            Box::into_raw(Box::new(VnScenario(scenario)))
        }
        Err(err) => {
            let code = match err {
                ScenarioError::Parse(_) => VnStatus::Parse,
                _ => VnStatus::InvalidArgument,
            };
            set_last_error(err.to_string());
            write_status(status, code);
            std::ptr::null_mut()
        }
    }
}

/// Pretty-printed JSON for the scenario. Free with `vn_string_free`;
/// returns NULL if `scenario` is NULL.
///
/// # Safety
/// `scenario` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_to_json(scenario: *const VnScenario) -> *mut c_char {
    let Some(handle) = (unsafe { scenario.as_ref() }) else {
        return std::ptr::null_mut();
    };
    let json = handle.0.to_json_pretty();
    CString::new(json).expect("JSON has no NUL").into_raw()
}

/// Sets the base seed used to derive per-trial RNG streams.
///
/// # Safety
/// `scenario` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_set_seed(scenario: *mut VnScenario, seed: u64) -> VnStatus {
    let Some(handle) = (unsafe { scenario.as_mut() }) else {
        set_last_error("scenario is NULL");
        return VnStatus::InvalidArgument;
    };
    handle.0.base_seed = seed;
    VnStatus::Ok
}

/// Sets the working side: 0 = left, 1 = right.
///
/// # Safety
/// `scenario` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_set_work_side(
    scenario: *mut VnScenario,
    side: c_int,
) -> VnStatus {
    let Some(handle) = (unsafe { scenario.as_mut() }) else {
        set_last_error("scenario is NULL");
        return VnStatus::InvalidArgument;
    };
    handle.0.nav.work_side = match side {
        0 => Side::Left,
        1 => Side::Right,
        other => {
            set_last_error(format!("side {other} is not 0 (left) or 1 (right)"));
            return VnStatus::InvalidArgument;
        }
    };
    VnStatus::Ok
}

/// Sets the number of trials (must be at least 1).
///
/// # Safety
/// `scenario` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_set_trials(scenario: *mut VnScenario, n: u64) -> VnStatus {
    let Some(handle) = (unsafe { scenario.as_mut() }) else {
        set_last_error("scenario is NULL");
        return VnStatus::InvalidArgument;
    };
    if n == 0 {
        set_last_error("n_trials must be at least 1");
        return VnStatus::InvalidArgument;
    }
    handle.0.n_trials = n;
    VnStatus::Ok
}

/// Frees a scenario handle. NULL is a no-op.
///
/// # Safety
/// `scenario` must be NULL or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_scenario_free(scenario: *mut VnScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Runs every trial of the scenario and returns the arrival summary.
///
/// `status` reports Ok when all trials finished, otherwise the failure of
/// the first unsuccessful trial. A summary is returned in either case (and
/// only NULL when the scenario itself is NULL or invalid), so partial
/// results stay inspectable. Free the summary with `vn_summary_free`.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `status` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn vn_run_experiment(
    scenario: *const VnScenario,
    status: *mut VnStatus,
) -> *mut VnSummary {
    let Some(handle) = (unsafe { scenario.as_ref() }) else {
        set_last_error("scenario is NULL");
        write_status(status, VnStatus::InvalidArgument);
        return std::ptr::null_mut();
    };
    if let Err(err) = handle.0.validate() {
        set_last_error(err.to_string());
        write_status(status, VnStatus::InvalidArgument);
        return std::ptr::null_mut();
    }
    let logs = run_trials(&handle.0);
    let summary = ExperimentSummary::from_trials(&logs);
    let code = match summary.overall_status() {
        TerminalStatus::Done => VnStatus::Ok,
        TerminalStatus::SearchFailed => VnStatus::SearchFailed,
        TerminalStatus::TickBudgetExceeded => VnStatus::BudgetExceeded,
    };
    if code != VnStatus::Ok {
        if let Some(detail) = logs
            .iter()
            .find(|l| l.status != TerminalStatus::Done)
            .map(|l| match &l.failure_detail {
                Some(d) => format!("trial {}: {}", l.trial_index, d),
                None => format!("trial {}: {}", l.trial_index, l.status.as_str()),
            })
        {
            set_last_error(detail);
        }
    }
    write_status(status, code);
    Box::into_raw(Box::new(VnSummary(summary)))
}

/// Mean arrival error in meters; NaN if `summary` is NULL or empty.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_mean_error_m(summary: *const VnSummary) -> f64 {
    match unsafe { summary.as_ref() } {
        Some(h) => h.0.mean_error_m,
        None => f64::NAN,
    }
}

/// Population standard deviation of arrival error in meters; NaN if
/// `summary` is NULL or empty.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_std_error_m(summary: *const VnSummary) -> f64 {
    match unsafe { summary.as_ref() } {
        Some(h) => h.0.std_pop_m,
        None => f64::NAN,
    }
}

/// Fraction of trials that finished; NaN if `summary` is NULL.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_completion_rate(summary: *const VnSummary) -> f64 {
    match unsafe { summary.as_ref() } {
        Some(h) => h.0.completion_rate,
        None => f64::NAN,
    }
}

/// Total arrivals recorded across all trials; 0 if `summary` is NULL.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_arrival_count(summary: *const VnSummary) -> u64 {
    match unsafe { summary.as_ref() } {
        Some(h) => h.0.n_arrivals as u64,
        None => 0,
    }
}

/// Number of trials in the summary; 0 if `summary` is NULL.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_trial_count(summary: *const VnSummary) -> u64 {
    match unsafe { summary.as_ref() } {
        Some(h) => h.0.trials.len() as u64,
        None => 0,
    }
}

/// Writes the summary CSV (per-arrival rows plus an aggregate block).
///
/// # Safety
/// `summary` must be NULL or a live handle; `path` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_write_csv(
    summary: *const VnSummary,
    path: *const c_char,
) -> VnStatus {
    let Some(handle) = (unsafe { summary.as_ref() }) else {
        set_last_error("summary is NULL");
        return VnStatus::InvalidArgument;
    };
    if path.is_null() {
        set_last_error("path is NULL");
        return VnStatus::InvalidArgument;
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(_) => {
            set_last_error("path is not valid UTF-8");
            return VnStatus::InvalidArgument;
        }
    };
    match export_summary(&handle.0, Path::new(path)) {
        Ok(()) => VnStatus::Ok,
        Err(err) => {
            set_last_error(err.to_string());
            VnStatus::Io
        }
    }
}

/// Pretty-printed JSON for the summary. Free with `vn_string_free`;
/// returns NULL if `summary` is NULL.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_to_json(summary: *const VnSummary) -> *mut c_char {
    let Some(handle) = (unsafe { summary.as_ref() }) else {
        return std::ptr::null_mut();
    };
    let json = serde_json::to_string_pretty(&handle.0).expect("summary serializes");
    CString::new(json).expect("JSON has no NUL").into_raw()
}

/// Frees a summary handle. NULL is a no-op.
///
/// # Safety
/// `summary` must be NULL or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_summary_free(summary: *mut VnSummary) {
    if !summary.is_null() {
        drop(unsafe { Box::from_raw(summary) });
    }
}
