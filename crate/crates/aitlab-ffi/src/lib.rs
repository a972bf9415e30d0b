//! C ABI for the `aitlab` crate.
//!
//! Conventions, mirrored by `include/aitlab.h`:
//!
//! - Objects cross the boundary as opaque handles created by `aitlab_*_parse`
//!   / `aitlab_run_*` and released by the matching `aitlab_*_free`. Handles
//!   are not thread-safe; confine each to one thread.
//! - Every fallible call returns an [`AitlabStatus`]. On failure a
//!   human-readable message is stored per thread and can be read with
//!   [`aitlab_last_error`] until the next call on the same thread.
//! - `const char *` fields of out-structs borrow from their report handle and
//!   die with it. Strings passed in must be NUL-terminated UTF-8.
//! - Status values `Tolerance`, `Invalid`, and `Inadmissible` equal the
//!   process exit codes used by the `aitlab` CLI for the same conditions.
//!
//! Panics are caught at the boundary and surface as [`AitlabStatus::Panic`];
//! they never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use aitlab::config::ExperimentConfig;
use aitlab::runner::{self, CompareReport};
use aitlab::validation;

/// Result codes. `Tolerance`/`Invalid`/`Inadmissible` match the CLI exit
/// codes 1/2/3; the remaining codes are boundary errors with no CLI analogue.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AitlabStatus {
    Ok = 0,
    /// A numerical check failed (only `aitlab_run_validate` returns this).
    Tolerance = 1,
    /// Bad configuration, parameters, or I/O.
    Invalid = 2,
    /// The model is well-formed but mathematically inadmissible.
    Inadmissible = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque parsed experiment configuration.
pub struct AitlabConfig {
    inner: ExperimentConfig,
}

/// Opaque result of a compare or simulate run.
pub struct AitlabReport {
    report: CompareReport,
    model: Vec<CString>,
    strategy: Vec<CString>,
    csv: CString,
}

/// One row of a report, filled by [`aitlab_report_row`]. Pointer fields
/// borrow from the report handle and are valid until it is freed.
#[repr(C)]
pub struct AitlabCompareRow {
    pub model: *const c_char,
    pub strategy: *const c_char,
    pub d_stock: f64,
    /// Zero when the model takes no rate-observation delay.
    pub d_rate: f64,
    pub n_paths: u64,
    pub n_steps: u64,
    pub seed: u64,
    pub clamp_count: u64,
    pub mean: f64,
    pub std_error: f64,
    /// 0 when no closed form exists for the row; the three fields after it
    /// are then NaN.
    pub has_closed_form: i32,
    pub closed_form: f64,
    pub abs_diff: f64,
    pub diff_in_se: f64,
    pub within_tolerance: i32,
}

/// Root search outcome, filled by [`aitlab_temporal_value`].
#[repr(C)]
pub struct AitlabTemporalValue {
    /// 1 when a finite root exists; `d_star` and `residual` are then set,
    /// otherwise NaN.
    pub is_finite: i32,
    pub d_star: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let stored = CString::new(message.replace('\0', " ")).expect("NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(error: &aitlab::Error) -> AitlabStatus {
    match error.exit_code() {
        3 => AitlabStatus::Inadmissible,
        _ => AitlabStatus::Invalid,
    }
}

fn fail(status: AitlabStatus, message: &str) -> AitlabStatus {
    set_last_error(message);
    status
}

/// Runs `body` with the panic guard and last-error bookkeeping every entry
/// point shares.
fn guarded(body: impl FnOnce() -> AitlabStatus) -> AitlabStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(
            AitlabStatus::Panic,
            "internal panic; handle state may be stale",
        ),
    }
}

/// Reads a required NUL-terminated UTF-8 argument.
///
/// # Safety
/// `ptr` must be NULL or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, AitlabStatus> {
    if ptr.is_null() {
        return Err(fail(
            AitlabStatus::NullArgument,
            &format!("{name} must not be NULL"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        fail(
            AitlabStatus::InvalidUtf8,
            &format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn required_ref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, AitlabStatus> {
    if ptr.is_null() {
        Err(fail(
            AitlabStatus::NullArgument,
            &format!("{name} must not be NULL"),
        ))
    } else {
        Ok(unsafe { &*ptr })
    }
}

unsafe fn required_mut<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, AitlabStatus> {
    if ptr.is_null() {
        Err(fail(
            AitlabStatus::NullArgument,
            &format!("{name} must not be NULL"),
        ))
    } else {
        Ok(unsafe { &mut *ptr })
    }
}

fn report_handle(report: CompareReport) -> Result<Box<AitlabReport>, AitlabStatus> {
    let mut model = Vec::with_capacity(report.rows.len());
    let mut strategy = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        model.push(CString::new(row.model).expect("static name"));
        strategy.push(CString::new(row.strategy).expect("static name"));
    }
    let mut csv = report.lines.join("\n");
    csv.push('\n');
    let csv =
        CString::new(csv).map_err(|_| fail(AitlabStatus::Invalid, "report text contains NUL"))?;
    Ok(Box::new(AitlabReport {
        report,
        model,
        strategy,
        csv,
    }))
}

/// ABI revision of this library; bump on any breaking header change.
#[no_mangle]
pub extern "C" fn aitlab_abi_version() -> u32 {
    1
}

/// Message describing the most recent failure on this thread, or NULL if the
/// most recent call succeeded. The pointer is valid until the next `aitlab_*`
/// call on the same thread.
#[no_mangle]
pub extern "C" fn aitlab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |message| message.as_ptr())
    })
}

/// Parses a TOML experiment document from memory.
///
/// # Safety
/// `toml_text` must be NUL-terminated; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn aitlab_config_parse(
    toml_text: *const c_char,
    out: *mut *mut AitlabConfig,
) -> AitlabStatus {
    guarded(|| {
        let out = match unsafe { required_mut(out, "out") } {
            Ok(out) => out,
            Err(status) => return status,
        };
        let text = match unsafe { required_str(toml_text, "toml_text") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match ExperimentConfig::from_toml_str(text, "<memory>") {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AitlabConfig { inner }));
                AitlabStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Parses a TOML experiment document from a file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn aitlab_config_parse_file(
    path: *const c_char,
    out: *mut *mut AitlabConfig,
) -> AitlabStatus {
    guarded(|| {
        let out = match unsafe { required_mut(out, "out") } {
            Ok(out) => out,
            Err(status) => return status,
        };
        let path = match unsafe { required_str(path, "path") } {
            Ok(path) => path,
            Err(status) => return status,
        };
        match ExperimentConfig::from_path(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AitlabConfig { inner }));
                AitlabStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Overrides the Monte Carlo seed of a parsed configuration.
///
/// # Safety
/// `config` must be a live handle from `aitlab_config_parse*`.
#[no_mangle]
pub unsafe extern "C" fn aitlab_config_set_seed(
    config: *mut AitlabConfig,
    seed: u64,
) -> AitlabStatus {
    guarded(|| {
        let config = match unsafe { required_mut(config, "config") } {
            Ok(config) => config,
            Err(status) => return status,
        };
        config.inner.mc.seed = seed;
        AitlabStatus::Ok
    })
}

/// Releases a configuration handle. NULL is a no-op.
///
/// # Safety
/// `config` must be NULL or a live handle, which becomes invalid.
#[no_mangle]
pub unsafe extern "C" fn aitlab_config_free(config: *mut AitlabConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

unsafe fn run_to_report(
    config: *const AitlabConfig,
    out_dir: *const c_char,
    out: *mut *mut AitlabReport,
    run: fn(&ExperimentConfig, Option<&Path>) -> aitlab::Result<CompareReport>,
) -> AitlabStatus {
    let out = match unsafe { required_mut(out, "out") } {
        Ok(out) => out,
        Err(status) => return status,
    };
    let config = match unsafe { required_ref(config, "config") } {
        Ok(config) => config,
        Err(status) => return status,
    };
    let out_dir = if out_dir.is_null() {
        None
    } else {
        match unsafe { required_str(out_dir, "out_dir") } {
            Ok(dir) => Some(Path::new(dir)),
            Err(status) => return status,
        }
    };
    match run(&config.inner, out_dir) {
        Ok(report) => match report_handle(report) {
            Ok(handle) => {
                *out = Box::into_raw(handle);
                AitlabStatus::Ok
            }
            Err(status) => status,
        },
        Err(e) => fail(status_of(&e), &e.to_string()),
    }
}

/// Runs both strategies plus their closed forms and returns the three-row
/// comparison report. When `out_dir` is non-NULL, `compare.csv` is written
/// beneath it.
///
/// # Safety
/// `config` must be a live handle; `out_dir` NULL or NUL-terminated; `out` a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn aitlab_run_compare(
    config: *const AitlabConfig,
    out_dir: *const c_char,
    out: *mut *mut AitlabReport,
) -> AitlabStatus {
    guarded(|| unsafe { run_to_report(config, out_dir, out, runner::run_compare) })
}

/// Runs only the configured strategy and returns a one-row report. When
/// `out_dir` is non-NULL, `simulate.csv` is written beneath it.
///
/// # Safety
/// Same contract as [`aitlab_run_compare`].
#[no_mangle]
pub unsafe extern "C" fn aitlab_run_simulate(
    config: *const AitlabConfig,
    out_dir: *const c_char,
    out: *mut *mut AitlabReport,
) -> AitlabStatus {
    guarded(|| unsafe { run_to_report(config, out_dir, out, runner::run_simulate) })
}

/// Number of rows in a report; 0 when `report` is NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aitlab_report_len(report: *const AitlabReport) -> usize {
    if report.is_null() {
        0
    } else {
        unsafe { &*report }.report.rows.len()
    }
}

/// Copies row `index` into `*out`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid destination; pointer
/// fields of `*out` stay valid only while `report` lives.
#[no_mangle]
pub unsafe extern "C" fn aitlab_report_row(
    report: *const AitlabReport,
    index: usize,
    out: *mut AitlabCompareRow,
) -> AitlabStatus {
    guarded(|| {
        let out = match unsafe { required_mut(out, "out") } {
            Ok(out) => out,
            Err(status) => return status,
        };
        let handle = match unsafe { required_ref(report, "report") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let Some(row) = handle.report.rows.get(index) else {
            return fail(
                AitlabStatus::OutOfRange,
                &format!(
                    "row {index} out of range ({} rows)",
                    handle.report.rows.len()
                ),
            );
        };
        *out = AitlabCompareRow {
            model: handle.model[index].as_ptr(),
            strategy: handle.strategy[index].as_ptr(),
            d_stock: row.d_stock,
            d_rate: row.d_rate,
            n_paths: row.estimate.n_paths,
            n_steps: row.estimate.n_steps,
            seed: row.estimate.seed,
            clamp_count: row.estimate.clamp_count,
            mean: row.estimate.mean,
            std_error: row.estimate.std_error,
            has_closed_form: i32::from(row.closed_form.is_some()),
            closed_form: row.closed_form.unwrap_or(f64::NAN),
            abs_diff: row.abs_diff().unwrap_or(f64::NAN),
            diff_in_se: row.diff_in_se().unwrap_or(f64::NAN),
            within_tolerance: i32::from(row.within_tolerance()),
        };
        AitlabStatus::Ok
    })
}

/// 1 when every row with a closed form sits inside its tolerance band,
/// otherwise 0 (also 0 for NULL).
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aitlab_report_within_tolerance(report: *const AitlabReport) -> i32 {
    if report.is_null() {
        0
    } else {
        i32::from(unsafe { &*report }.report.all_within_tolerance)
    }
}

/// Full report as CSV text (header line first, `\n` separators, trailing
/// newline). Borrowed from the handle; NULL when `report` is NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aitlab_report_csv(report: *const AitlabReport) -> *const c_char {
    if report.is_null() {
        std::ptr::null()
    } else {
        unsafe { &*report }.csv.as_ptr()
    }
}

/// Releases a report handle. NULL is a no-op.
///
/// # Safety
/// `report` must be NULL or a live handle, which becomes invalid.
#[no_mangle]
pub unsafe extern "C" fn aitlab_report_free(report: *mut AitlabReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Solves for the observation delay at which the insider's advantage in the
/// stock exactly offsets the penalty from the delayed rate, per the
/// configured rate model. Requires a `vasicek` or `hull_white` model.
///
/// # Safety
/// `config` must be a live handle and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn aitlab_temporal_value(
    config: *const AitlabConfig,
    out: *mut AitlabTemporalValue,
) -> AitlabStatus {
    guarded(|| {
        let out = match unsafe { required_mut(out, "out") } {
            Ok(out) => out,
            Err(status) => return status,
        };
        let config = match unsafe { required_ref(config, "config") } {
            Ok(config) => config,
            Err(status) => return status,
        };
        match runner::run_temporal_value(&config.inner, None) {
            Ok(report) => {
                let result = report.rows[0].result;
                *out = AitlabTemporalValue {
                    is_finite: i32::from(result.is_finite()),
                    d_star: result.d_star().unwrap_or(f64::NAN),
                    residual: result.residual().unwrap_or(f64::NAN),
                };
                AitlabStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Runs the internal numerical check battery with the given seed, storing the
/// pass and total counts. Returns `Tolerance` when any check fails (the
/// failing check names are in the last-error message).
///
/// # Safety
/// `passed` and `total` must be valid destinations.
#[no_mangle]
pub unsafe extern "C" fn aitlab_run_validate(
    seed: u64,
    passed: *mut usize,
    total: *mut usize,
) -> AitlabStatus {
    guarded(|| {
        let passed = match unsafe { required_mut(passed, "passed") } {
            Ok(passed) => passed,
            Err(status) => return status,
        };
        let total = match unsafe { required_mut(total, "total") } {
            Ok(total) => total,
            Err(status) => return status,
        };
        let report = validation::run_validate(seed);
        *total = report.checks.len();
        *passed = report
            .checks
            .iter()
            .filter(|check| check.outcome.is_ok())
            .count();
        if report.all_passed {
            AitlabStatus::Ok
        } else {
            let failures: Vec<&str> = report
                .checks
                .iter()
                .filter(|check| check.outcome.is_err())
                .map(|check| check.name)
                .collect();
            fail(
                AitlabStatus::Tolerance,
                &format!("failed checks: {}", failures.join(", ")),
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    const BSM_DOC: &str = r#"
strategy = "ait"

[model]
kind = "bsm"

[curves]
mu = { constant = 0.08 }
rho = { constant = 0.02 }
sigma = { constant = 0.2 }

[grid]
horizon = 1.0
n_steps = 100

[mc]
n_paths = 2000
seed = 42

[delays]
d_stock = 0.25
"#;

    fn parse(doc: &str) -> *mut AitlabConfig {
        let text = CString::new(doc).unwrap();
        let mut config = ptr::null_mut();
        let status = unsafe { aitlab_config_parse(text.as_ptr(), &mut config) };
        assert_eq!(status, AitlabStatus::Ok);
        assert!(!config.is_null());
        config
    }

    fn last_error_string() -> Option<String> {
        let ptr = aitlab_last_error();
        if ptr.is_null() {
            None
        } else {
            Some(unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string())
        }
    }

    fn vasicek_doc(xi: f64) -> String {
        format!(
            r#"
strategy = "ait"

[model]
kind = "vasicek"
a = 1.0
b = 0.05
xi = {xi}
r0 = 0.03

[curves]
mu = {{ constant = 0.08 }}
sigma = {{ constant = 0.2 }}

[grid]
horizon = 1.0
n_steps = 400

[mc]
n_paths = 100
seed = 5

[delays]
d_stock = 0.3
d_rate = 0.3
"#
        )
    }

    #[test]
    fn abi_version_is_one() {
        assert_eq!(aitlab_abi_version(), 1);
    }

    #[test]
    fn compare_round_trip_exposes_rows_and_csv() {
        let config = parse(BSM_DOC);
        let mut report = ptr::null_mut();
        let status = unsafe { aitlab_run_compare(config, ptr::null(), &mut report) };
        assert_eq!(status, AitlabStatus::Ok);
        assert!(last_error_string().is_none());
        assert_eq!(unsafe { aitlab_report_len(report) }, 3);
        assert_eq!(unsafe { aitlab_report_within_tolerance(report) }, 1);

        let mut row = std::mem::MaybeUninit::<AitlabCompareRow>::uninit();
        let status = unsafe { aitlab_report_row(report, 0, row.as_mut_ptr()) };
        assert_eq!(status, AitlabStatus::Ok);
        let row = unsafe { row.assume_init() };
        let model = unsafe { CStr::from_ptr(row.model) }.to_str().unwrap();
        let strategy = unsafe { CStr::from_ptr(row.strategy) }.to_str().unwrap();
        assert_eq!(model, "black_scholes");
        assert_eq!(strategy, "merton");
        assert_eq!((row.n_paths, row.n_steps, row.seed), (2000, 100, 42));
        assert_eq!(row.has_closed_form, 1);
        assert_eq!(row.within_tolerance, 1);
        assert!(row.abs_diff <= 3.0 * row.std_error + 1e-12);
        assert_eq!(row.d_rate, 0.0);

        let csv = unsafe { CStr::from_ptr(aitlab_report_csv(report)) }
            .to_str()
            .unwrap();
        assert!(csv.starts_with("model,strategy,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.ends_with('\n'));

        let mut row = std::mem::MaybeUninit::<AitlabCompareRow>::uninit();
        let status = unsafe { aitlab_report_row(report, 3, row.as_mut_ptr()) };
        assert_eq!(status, AitlabStatus::OutOfRange);
        assert!(last_error_string().unwrap().contains("out of range"));

        unsafe { aitlab_report_free(report) };
        unsafe { aitlab_config_free(config) };
    }

    #[test]
    fn simulate_returns_one_row_for_configured_strategy() {
        let config = parse(BSM_DOC);
        let mut report = ptr::null_mut();
        let status = unsafe { aitlab_run_simulate(config, ptr::null(), &mut report) };
        assert_eq!(status, AitlabStatus::Ok);
        assert_eq!(unsafe { aitlab_report_len(report) }, 1);
        let mut row = std::mem::MaybeUninit::<AitlabCompareRow>::uninit();
        assert_eq!(
            unsafe { aitlab_report_row(report, 0, row.as_mut_ptr()) },
            AitlabStatus::Ok
        );
        let row = unsafe { row.assume_init() };
        let strategy = unsafe { CStr::from_ptr(row.strategy) }.to_str().unwrap();
        assert_eq!(strategy, "ait");
        unsafe { aitlab_report_free(report) };
        unsafe { aitlab_config_free(config) };
    }

    #[test]
    fn seed_override_reaches_report_rows() {
        let config = parse(BSM_DOC);
        assert_eq!(
            unsafe { aitlab_config_set_seed(config, 9001) },
            AitlabStatus::Ok
        );
        let mut report = ptr::null_mut();
        assert_eq!(
            unsafe { aitlab_run_compare(config, ptr::null(), &mut report) },
            AitlabStatus::Ok
        );
        let mut row = std::mem::MaybeUninit::<AitlabCompareRow>::uninit();
        assert_eq!(
            unsafe { aitlab_report_row(report, 1, row.as_mut_ptr()) },
            AitlabStatus::Ok
        );
        assert_eq!(unsafe { row.assume_init() }.seed, 9001);
        unsafe { aitlab_report_free(report) };
        unsafe { aitlab_config_free(config) };
    }

    #[test]
    fn null_and_malformed_inputs_are_rejected() {
        let mut config = ptr::null_mut();
        let status = unsafe { aitlab_config_parse(ptr::null(), &mut config) };
        assert_eq!(status, AitlabStatus::NullArgument);
        assert!(last_error_string().unwrap().contains("toml_text"));

        let text = CString::new("strategy = \"ait\"").unwrap();
        let status = unsafe { aitlab_config_parse(text.as_ptr(), ptr::null_mut()) };
        assert_eq!(status, AitlabStatus::NullArgument);

        let status = unsafe { aitlab_config_parse(text.as_ptr(), &mut config) };
        assert_eq!(status, AitlabStatus::Invalid);
        assert!(config.is_null());
        assert!(last_error_string().is_some());

        let path = CString::new("/no/such/file.toml").unwrap();
        let status = unsafe { aitlab_config_parse_file(path.as_ptr(), &mut config) };
        assert_eq!(status, AitlabStatus::Invalid);

        unsafe { aitlab_config_free(ptr::null_mut()) };
        unsafe { aitlab_report_free(ptr::null_mut()) };
        assert_eq!(unsafe { aitlab_report_len(ptr::null()) }, 0);
        assert_eq!(unsafe { aitlab_report_within_tolerance(ptr::null()) }, 0);
        assert!(unsafe { aitlab_report_csv(ptr::null()) }.is_null());
    }

    #[test]
    fn divergent_variance_model_is_inadmissible() {
        let doc = r#"
strategy = "merton"

[model]
kind = "heston"
kappa = 1.0
theta = 0.03
eta = 0.2
v0 = 0.04

[curves]
mu = { constant = 0.08 }
rho = { constant = 0.02 }

[grid]
horizon = 1.0
n_steps = 50

[mc]
n_paths = 100
seed = 1

[delays]
d_stock = 0.25
"#;
        let config = parse(doc);
        let mut report = ptr::null_mut();
        let status = unsafe { aitlab_run_compare(config, ptr::null(), &mut report) };
        assert_eq!(status, AitlabStatus::Inadmissible);
        assert!(report.is_null());
        assert!(last_error_string().unwrap().contains("finite only when"));
        unsafe { aitlab_config_free(config) };
    }

    #[test]
    fn temporal_value_reports_finite_and_infinite_cases() {
        let config = parse(&vasicek_doc(0.5));
        let mut value = AitlabTemporalValue {
            is_finite: -1,
            d_star: 0.0,
            residual: 0.0,
        };
        assert_eq!(
            unsafe { aitlab_temporal_value(config, &mut value) },
            AitlabStatus::Ok
        );
        assert_eq!(value.is_finite, 1);
        assert!(value.d_star > 0.0 && value.d_star < 1.0);
        assert!(value.residual.abs() <= 1e-10);
        unsafe { aitlab_config_free(config) };

        let config = parse(&vasicek_doc(0.0));
        assert_eq!(
            unsafe { aitlab_temporal_value(config, &mut value) },
            AitlabStatus::Ok
        );
        assert_eq!(value.is_finite, 0);
        assert!(value.d_star.is_nan());
        unsafe { aitlab_config_free(config) };

        let config = parse(BSM_DOC);
        assert_eq!(
            unsafe { aitlab_temporal_value(config, &mut value) },
            AitlabStatus::Invalid
        );
        assert!(last_error_string().unwrap().contains("rate model"));
        unsafe { aitlab_config_free(config) };
    }

    #[test]
    fn validate_battery_passes_through_the_boundary() {
        let mut passed = 0usize;
        let mut total = 0usize;
        let status = unsafe { aitlab_run_validate(42, &mut passed, &mut total) };
        assert_eq!(status, AitlabStatus::Ok);
        assert_eq!(passed, total);
        assert!(total >= 20);
    }
}
