//! Drives the exported C entry points through their raw signatures,
//! covering ownership, exit codes, and the JSON request envelope.

use std::ffi::{c_int, CStr, CString};
use std::ptr;

use kmc_ffi::{
    kmc_run, kmc_session_free, kmc_session_new, kmc_session_run, kmc_session_set_budget,
    kmc_string_free, KmcSession, KMC_ERROR, KMC_OK, KMC_UNDECIDED,
};
use serde_json::Value;

fn take_report(raw: *mut std::ffi::c_char) -> Value {
    assert!(!raw.is_null());
    let text = unsafe { CStr::from_ptr(raw) }.to_str().unwrap().to_string();
    unsafe { kmc_string_free(raw) };
    serde_json::from_str(&text).expect("reports are valid JSON")
}

fn run_on(session: *mut KmcSession, request: &str) -> (Value, c_int) {
    let req = CString::new(request).unwrap();
    let mut code: c_int = -1;
    let raw = unsafe { kmc_session_run(session, req.as_ptr(), &mut code) };
    (take_report(raw), code)
}

#[test]
fn gamma_sequence_through_the_c_api() {
    let s = kmc_session_new(1, 7);
    let (report, code) = run_on(s, r#"{"command":"gamma","place":"x^2+t1","count":4}"#);
    assert_eq!(code, KMC_OK);
    let gammas: Vec<&str> = report["gammas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(gammas, ["1", "0", "t1", "0", "t1^2"]);
    assert_eq!(report["seed"], 7);
    unsafe { kmc_session_free(s) };
}

#[test]
fn verdicts_map_to_exit_codes() {
    let s = kmc_session_new(1, 0);
    let (report, code) = run_on(
        s,
        r#"{"command":"iszero","class":"(t1) dlog t1 ^ dlog x"}"#,
    );
    assert_eq!(code, KMC_OK);
    assert_eq!(report["verdict"], "ZERO");
    let (report, code) = run_on(s, r#"{"command":"iszero","class":"(1) dlog t1 ^ dlog x"}"#);
    assert_eq!(code, KMC_OK);
    assert_eq!(report["verdict"], "NONZERO");
    unsafe { kmc_session_free(s) };
}

#[test]
fn envelope_fields_override_the_session() {
    let s = kmc_session_new(1, 0);
    let (report, code) = run_on(
        s,
        r#"{"command":"iszero","class":"(1) dlog t1 ^ dlog t2","tower":2}"#,
    );
    assert_eq!(code, KMC_OK);
    assert_eq!(report["tower"], 2);
    assert_eq!(report["verdict"], "NONZERO");
    unsafe { kmc_session_free(s) };
}

#[test]
fn tight_budget_turns_classification_inconclusive() {
    // Constant coefficients dodge the specialization certificate, since
    // x^2 + x + 1 factors over every even-degree extension, so the verdict
    // rests on the budget-gated factor search alone.
    let s = kmc_session_new(1, 0);
    unsafe { kmc_session_set_budget(s, 1) };
    let (report, code) = run_on(s, r#"{"command":"classify","poly":"x^2+x+1"}"#);
    assert_eq!(code, KMC_UNDECIDED, "report: {}", report);
    assert_eq!(report["verdict"], "inconclusive");
    unsafe { kmc_session_free(s) };
}

#[test]
fn bad_requests_come_back_as_error_reports() {
    let mut code: c_int = -1;
    let raw = unsafe { kmc_run(ptr::null(), &mut code) };
    let report = take_report(raw);
    assert_eq!(code, KMC_ERROR);
    assert_eq!(report["error"]["kind"], "syntax");

    let req = CString::new("{not json").unwrap();
    let raw = unsafe { kmc_run(req.as_ptr(), &mut code) };
    let report = take_report(raw);
    assert_eq!(code, KMC_ERROR);
    assert_eq!(report["error"]["kind"], "syntax");

    let req = CString::new(r#"{"command":"launch"}"#).unwrap();
    let raw = unsafe { kmc_run(req.as_ptr(), &mut code) };
    let report = take_report(raw);
    assert_eq!(code, KMC_ERROR);
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("unknown command"));

    let raw = unsafe { kmc_session_run(ptr::null_mut(), req.as_ptr(), &mut code) };
    let report = take_report(raw);
    assert_eq!(code, KMC_ERROR);
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("null session"));
}

#[test]
fn null_exit_code_pointer_is_allowed() {
    let req = CString::new(r#"{"command":"classify","poly":"x+t1"}"#).unwrap();
    let raw = unsafe { kmc_run(req.as_ptr(), ptr::null_mut()) };
    let report = take_report(raw);
    assert_eq!(report["verdict"], "irreducible");
}
