//! C ABI for the hgk toolkit.
//!
//! Contexts are opaque handles created from JSON config text (or a bundled
//! fixture name); commands run against a context and return JSON report
//! strings. All strings crossing the boundary are NUL-terminated UTF-8; the
//! caller frees returned strings with [`hgk_string_free`]. Errors are
//! reported by status code, with a thread-local message available through
//! [`hgk_last_error`].

use hgk_core::cli::{execute, ExecError, Invocation};
use hgk_core::config::{mat_from_json, Config, MatJson};
use hgk_core::fixtures;
use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgkStatus {
    Ok = 0,
    /// config or matrix text is not valid JSON
    ParseError = 1,
    /// JSON is well-formed but violates the config schema
    SchemaError = 2,
    /// config is schematically valid but fails semantic validation
    ValidationError = 3,
    /// a numeric routine failed (singular input, non-convergence, ...)
    NumericError = 4,
    /// null pointer, bad UTF-8, or unknown command / fixture name
    InvalidArgument = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Opaque context: a parsed config. Structures are built per command so a
/// context stays cheap to create and share.
pub struct HgkContext {
    config: Config,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, HgkStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(HgkStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        HgkStatus::InvalidArgument
    })
}

fn config_status(e: &hgk_core::config::ConfigError) -> HgkStatus {
    use hgk_core::config::ConfigError::*;
    match e {
        Parse(_) => HgkStatus::ParseError,
        Schema(_) => HgkStatus::SchemaError,
        Validation(_) | Setup(_) => HgkStatus::ValidationError,
        Io(_) => HgkStatus::InvalidArgument,
    }
}

/// Create a context from JSON config text.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn hgk_context_from_json(
    config_json: *const c_char,
    out: *mut *mut HgkContext,
) -> HgkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HgkStatus::InvalidArgument;
    }
    let text = match read_str(config_json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match Config::from_str(text) {
        Ok(config) => {
            *out = Box::into_raw(Box::new(HgkContext { config }));
            HgkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            *out = ptr::null_mut();
            config_status(&e)
        }
    }
}

/// Create a context from a bundled fixture name ("sl2" or "sl8").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hgk_context_from_fixture(
    name: *const c_char,
    out: *mut *mut HgkContext,
) -> HgkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HgkStatus::InvalidArgument;
    }
    let name = match read_str(name) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match fixtures::bundled_config(name) {
        Some(config) => {
            *out = Box::into_raw(Box::new(HgkContext { config }));
            HgkStatus::Ok
        }
        None => {
            set_error(&format!("unknown fixture {name:?} (try sl2 or sl8)"));
            *out = ptr::null_mut();
            HgkStatus::InvalidArgument
        }
    }
}

/// Canonical JSON text of the context's config.
///
/// # Safety
/// `ctx` must be a live handle from a constructor; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hgk_context_config_json(
    ctx: *const HgkContext,
    out: *mut *mut c_char,
) -> HgkStatus {
    if ctx.is_null() || out.is_null() {
        set_error("null pointer argument");
        return HgkStatus::InvalidArgument;
    }
    let text = (*ctx).config.canonical_json.clone();
    *out = CString::new(text).unwrap().into_raw();
    HgkStatus::Ok
}

/// Run a command against a context and return the JSON report.
///
/// `command` is one of "validate", "member", "flow", "closed", "slice",
/// "atlas". Commands taking a point require `matrix_json` (row-major nested
/// arrays of [re, im] pairs); the others ignore it (pass NULL).
///
/// # Safety
/// `ctx` must be a live handle; strings NUL-terminated; `report_out` valid.
/// The returned string must be freed with `hgk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hgk_run(
    ctx: *const HgkContext,
    command: *const c_char,
    matrix_json: *const c_char,
    report_out: *mut *mut c_char,
) -> HgkStatus {
    if ctx.is_null() || report_out.is_null() {
        set_error("null pointer argument");
        return HgkStatus::InvalidArgument;
    }
    *report_out = ptr::null_mut();
    let command = match read_str(command) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let needs_matrix = matches!(command, "member" | "flow" | "closed" | "slice");
    let matrix = if needs_matrix {
        let text = match read_str(matrix_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let parsed: MatJson = match serde_json_from(text) {
            Ok(m) => m,
            Err(msg) => {
                set_error(&msg);
                return HgkStatus::ParseError;
            }
        };
        match mat_from_json(&parsed) {
            Ok(m) => Some(m),
            Err(e) => {
                set_error(&e.to_string());
                return HgkStatus::ValidationError;
            }
        }
    } else {
        None
    };
    let inv = match (command, matrix) {
        ("validate", _) => Invocation::Validate,
        ("member", Some(m)) => Invocation::Member(m),
        ("flow", Some(m)) => Invocation::Flow(m),
        ("closed", Some(m)) => Invocation::Closed(m),
        ("slice", Some(m)) => Invocation::Slice(m),
        ("atlas", _) => Invocation::Atlas,
        _ => {
            set_error(&format!("unknown command {command:?}"));
            return HgkStatus::InvalidArgument;
        }
    };
    match execute(&(*ctx).config, &inv) {
        Ok((report, _code)) => {
            *report_out = CString::new(report.to_json()).unwrap().into_raw();
            HgkStatus::Ok
        }
        Err(ExecError::Usage(msg)) => {
            set_error(&msg);
            HgkStatus::ValidationError
        }
        Err(ExecError::Numeric(msg)) => {
            set_error(&msg);
            HgkStatus::NumericError
        }
    }
}

fn serde_json_from(text: &str) -> Result<MatJson, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// Run a bundled example suite; the report carries per-check pass/fail.
///
/// # Safety
/// `name` NUL-terminated; `report_out` valid; `passed_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hgk_run_example(
    name: *const c_char,
    passed_out: *mut bool,
    report_out: *mut *mut c_char,
) -> HgkStatus {
    if report_out.is_null() {
        set_error("null pointer argument");
        return HgkStatus::InvalidArgument;
    }
    *report_out = ptr::null_mut();
    let name = match read_str(name) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let Some(result) = hgk_core::golden::run_suite(name) else {
        set_error(&format!("unknown example {name:?}"));
        return HgkStatus::InvalidArgument;
    };
    let cfg = fixtures::bundled_config(name).unwrap();
    let report = hgk_core::report::Report::new(
        cfg.digest(),
        &format!("example {name}"),
        cfg.file.numerics.seed,
        hgk_core::golden::suite_payload(&result),
    );
    if !passed_out.is_null() {
        *passed_out = result.passed;
    }
    *report_out = CString::new(report.to_json()).unwrap().into_raw();
    HgkStatus::Ok
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by an hgk function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn hgk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Destroy a context handle.
///
/// # Safety
/// `ctx` must be a live handle from a constructor and not freed before.
#[no_mangle]
pub unsafe extern "C" fn hgk_context_free(ctx: *mut HgkContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Thread-local message for the most recent error; valid until the next
/// failing call on this thread.
#[no_mangle]
pub extern "C" fn hgk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hgk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
