//! Exercises the C surface from Rust: handle lifecycle, status codes, and
//! report contents.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use asd_ffi::{
    asd_check_l, asd_connection_free, asd_connection_parse, asd_decompose, asd_katz,
    asd_last_error, asd_lattice, asd_psi, asd_specialize, asd_string_free, AsdConnection,
    AsdStatus,
};

fn corpus_json(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    CString::new(std::fs::read_to_string(path).expect("corpus case")).unwrap()
}

fn parse(name: &str) -> *mut AsdConnection {
    let json = corpus_json(name);
    let mut conn: *mut AsdConnection = ptr::null_mut();
    let status = unsafe { asd_connection_parse(json.as_ptr(), &mut conn) };
    assert_eq!(status, AsdStatus::Ok);
    assert!(!conn.is_null());
    conn
}

fn take_json(out: *mut c_char) -> serde_json::Value {
    assert!(!out.is_null());
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { asd_string_free(out) };
    serde_json::from_str(&text).expect("valid JSON report")
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(asd_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn status_codes_match_the_exit_codes() {
    assert_eq!(AsdStatus::Ok as i32, 0);
    assert_eq!(AsdStatus::ParseError as i32, 1);
    assert_eq!(AsdStatus::PreconditionError as i32, 2);
    assert_eq!(AsdStatus::Falsifier as i32, 3);
    assert_eq!(AsdStatus::NullPointer as i32, 4);
    assert_eq!(AsdStatus::Panic as i32, 5);
}

#[test]
fn parse_and_katz_round_trip() {
    let conn = parse("02.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_katz(conn, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    assert_eq!(last_error(), "");
    let v = take_json(out);
    assert_eq!(v["results"]["rho"], "2");
    unsafe { asd_connection_free(conn) };
}

#[test]
fn malformed_json_sets_the_error() {
    let bad = CString::new("{\"schema\":").unwrap();
    let mut conn: *mut AsdConnection = ptr::null_mut();
    let status = unsafe { asd_connection_parse(bad.as_ptr(), &mut conn) };
    assert_eq!(status, AsdStatus::ParseError);
    assert!(conn.is_null());
    assert!(last_error().contains("parse error"), "message: {}", last_error());
}

#[test]
fn null_arguments_are_rejected() {
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { asd_katz(ptr::null(), &mut out) },
        AsdStatus::NullPointer
    );
    let conn = parse("01.json");
    assert_eq!(
        unsafe { asd_katz(conn, ptr::null_mut()) },
        AsdStatus::NullPointer
    );
    assert_eq!(
        unsafe { asd_connection_parse(ptr::null(), ptr::null_mut()) },
        AsdStatus::NullPointer
    );
    unsafe { asd_connection_free(conn) };
}

#[test]
fn specialize_reports_forms_and_honors_the_slope_gate() {
    let conn = parse("04.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_specialize(conn, 1, ptr::null(), 0, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert_eq!(v["results"]["forms"][0], "[x1=1] y1 - y2");

    let point = CString::new("x1=4").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_specialize(conn, 1, point.as_ptr(), 0, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert_eq!(v["results"]["forms"][0], "[x1=4] y1 - 4*y2");
    unsafe { asd_connection_free(conn) };

    let conn = parse("02.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_specialize(conn, 1, ptr::null(), 0, &mut out) };
    assert_eq!(status, AsdStatus::PreconditionError);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    unsafe { asd_connection_free(conn) };
}

#[test]
fn check_l_defaults_to_the_slope() {
    let conn = parse("05.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_check_l(conn, 0, 0, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert_eq!(v["results"]["l_holds"], true);
    unsafe { asd_connection_free(conn) };
}

#[test]
fn psi_sees_the_exponential_kill_the_cycles() {
    let conn = parse("24_line.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_psi(conn, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert_eq!(v["results"]["psi_empty"], true);
    unsafe { asd_connection_free(conn) };
}

#[test]
fn lattice_accepts_a_strip_offset() {
    let conn = parse("02.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_lattice(conn, ptr::null(), &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert_eq!(v["results"]["stable_weight"], 2);

    let tau = CString::new("-1/2").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_lattice(conn, tau.as_ptr(), &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    take_json(out);
    unsafe { asd_connection_free(conn) };
}

#[test]
fn decompose_returns_the_fibre_module() {
    let conn = parse("04.json");
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { asd_decompose(conn, 0, &mut out) };
    assert_eq!(status, AsdStatus::Ok);
    let v = take_json(out);
    assert!(v["results"]["forms"].is_array());
    unsafe { asd_connection_free(conn) };
}

#[test]
fn error_message_clears_after_a_success() {
    let bad = CString::new("not json").unwrap();
    let mut conn: *mut AsdConnection = ptr::null_mut();
    unsafe { asd_connection_parse(bad.as_ptr(), &mut conn) };
    assert!(!last_error().is_empty());
    let conn = parse("01.json");
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { asd_katz(conn, &mut out) }, AsdStatus::Ok);
    unsafe { asd_string_free(out) };
    assert_eq!(last_error(), "");
    unsafe { asd_connection_free(conn) };
}

#[test]
fn generated_header_declares_the_surface() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/asd.h");
    let text = std::fs::read_to_string(header).expect("header generated by the build");
    for needle in [
        "#ifndef ASD_H",
        "typedef struct AsdConnection AsdConnection;",
        "AsdStatus_Falsifier = 3",
        "asd_connection_parse",
        "asd_specialize",
        "asd_last_error",
        "asd_string_free",
    ] {
        assert!(text.contains(needle), "header misses {needle}");
    }
}
