//! C interface to the cohomology engine. Every operation goes through one
//! entry point taking a JSON request string; reports come back as JSON
//! strings owned by this library and released with `kmc_string_free`.
//!
//! A request is an object with a `command` field naming the operation and
//! its arguments, for example
//!
//!   {"command": "iszero", "class": "(1) dlog t1 ^ dlog x"}
//!
//! Commands: residue, normalform, transfer (class, place), reciprocity,
//! iszero (class), gamma (place, count), classify (poly), selftest
//! (suite). The optional envelope fields tower, seed, bound, and
//! teich_depth override the session settings for a single request.

use std::ffi::{c_char, c_int, CStr, CString};

use kmc_core::session::{run_json_with, Session};

/// Request handled and the verdict was decisive.
pub const KMC_OK: c_int = 0;
/// Request failed; the report carries an `error` object.
pub const KMC_ERROR: c_int = 1;
/// Request handled but the verdict is UNKNOWN or INCONCLUSIVE.
pub const KMC_UNDECIDED: c_int = 2;

/// Opaque session configuration: tower size, seed, search budget, and
/// Teichmuller depth. Not thread-safe; use one handle per thread.
pub struct KmcSession {
    inner: Session,
}

fn report_string(report: String, code: i32, exit_code: *mut c_int) -> *mut c_char {
    let out = CString::new(report).unwrap_or_else(|_| {
        CString::new("{\"error\":{\"kind\":\"unsupported\",\"message\":\"report contained an interior NUL\"}}")
            .expect("fallback report is NUL-free")
    });
    if !exit_code.is_null() {
        unsafe { *exit_code = code };
    }
    out.into_raw()
}

fn bad_request(message: &str, exit_code: *mut c_int) -> *mut c_char {
    report_string(
        format!(
            "{{\"error\":{{\"kind\":\"syntax\",\"message\":\"{}\"}}}}",
            message
        ),
        KMC_ERROR,
        exit_code,
    )
}

/// Creates a session over F2(t1..tK)(x) with `tower` ground variables and
/// the given self-test seed. Budget and depth start at library defaults.
/// Never returns NULL; release with `kmc_session_free`.
#[no_mangle]
pub extern "C" fn kmc_session_new(tower: usize, seed: u64) -> *mut KmcSession {
    let inner = Session {
        ground_vars: tower,
        seed,
        ..Session::default()
    };
    Box::into_raw(Box::new(KmcSession { inner }))
}

/// Releases a session handle.
///
/// # Safety
/// `session` must be NULL or a pointer from `kmc_session_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn kmc_session_free(session: *mut KmcSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Sets the work budget for zero decisions and place certification.
///
/// # Safety
/// `session` must be a live pointer from `kmc_session_new`.
#[no_mangle]
pub unsafe extern "C" fn kmc_session_set_budget(session: *mut KmcSession, budget: usize) {
    if let Some(s) = session.as_mut() {
        s.inner.budget = budget;
    }
}

/// Sets the truncation depth for Teichmuller lift computations.
///
/// # Safety
/// `session` must be a live pointer from `kmc_session_new`.
#[no_mangle]
pub unsafe extern "C" fn kmc_session_set_teich_depth(session: *mut KmcSession, depth: usize) {
    if let Some(s) = session.as_mut() {
        s.inner.teich_depth = depth;
    }
}

/// Runs one JSON request against a session and returns the JSON report as
/// a NUL-terminated string owned by the library. When `exit_code` is not
/// NULL it receives KMC_OK, KMC_ERROR, or KMC_UNDECIDED. Errors never
/// crash; they land in the report's `error` field with KMC_ERROR.
///
/// # Safety
/// `session` must be a live pointer from `kmc_session_new`, `request` a
/// NUL-terminated string, and `exit_code` NULL or a valid int pointer. The
/// returned string must be released with `kmc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn kmc_session_run(
    session: *mut KmcSession,
    request: *const c_char,
    exit_code: *mut c_int,
) -> *mut c_char {
    let Some(handle) = session.as_ref() else {
        return bad_request("null session handle", exit_code);
    };
    run_at(&handle.inner, request, exit_code)
}

/// Runs one JSON request with default session settings (tower 1, seed 0).
/// Envelope fields in the request still apply. Same ownership rules as
/// `kmc_session_run`.
///
/// # Safety
/// `request` must be a NUL-terminated string and `exit_code` NULL or a
/// valid int pointer. The returned string must be released with
/// `kmc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn kmc_run(request: *const c_char, exit_code: *mut c_int) -> *mut c_char {
    run_at(&Session::default(), request, exit_code)
}

unsafe fn run_at(base: &Session, request: *const c_char, exit_code: *mut c_int) -> *mut c_char {
    if request.is_null() {
        return bad_request("null request", exit_code);
    }
    let Ok(text) = CStr::from_ptr(request).to_str() else {
        return bad_request("request is not valid UTF-8", exit_code);
    };
    let (report, code) = run_json_with(base, text);
    report_string(report, code, exit_code)
}

/// Releases a string returned by `kmc_run` or `kmc_session_run`.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn kmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
