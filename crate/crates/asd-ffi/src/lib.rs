//! C interface over the connection engine: opaque connection handles,
//! status codes matching the command-line exit codes, and JSON reports
//! identical to the `--json` output of the binary.
//!
//! Every function that can fail returns an [`AsdStatus`] and leaves a
//! message for [`asd_last_error`]. Strings handed out through `out_json`
//! are owned by the caller and must be released with [`asd_string_free`];
//! connections must be released with [`asd_connection_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use asd::cli;
use asd::report::Report;
use asd::schema::ConnectionFile;
use asd::Error;

/// Outcome of an interface call. `Falsifier` mirrors exit code 3 of the
/// binary: the engine found a counterexample to an expected identity, which
/// is the scientifically interesting failure and never a usage error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsdStatus {
    Ok = 0,
    ParseError = 1,
    PreconditionError = 2,
    Falsifier = 3,
    NullPointer = 4,
    Panic = 5,
}

/// A validated connection file. Opaque; create with
/// [`asd_connection_parse`], release with [`asd_connection_free`].
pub struct AsdConnection {
    file: ConnectionFile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("interior nuls removed");
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
}

fn status_of(e: &Error) -> AsdStatus {
    match e.exit_code() {
        1 => AsdStatus::ParseError,
        3 => AsdStatus::Falsifier,
        _ => AsdStatus::PreconditionError,
    }
}

fn fail(e: Error) -> AsdStatus {
    set_last_error(&e.to_string());
    status_of(&e)
}

/// Runs a fallible body under a panic guard and stores its report through
/// `out_json` on success.
fn guarded_report(
    out_json: *mut *mut c_char,
    body: impl FnOnce() -> asd::Result<Report>,
) -> AsdStatus {
    if out_json.is_null() {
        set_last_error("output pointer is null");
        return AsdStatus::NullPointer;
    }
    let outcome = catch_unwind(AssertUnwindSafe(body));
    match outcome {
        Ok(Ok(report)) => {
            let c = CString::new(report.to_json()).expect("reports carry no nul bytes");
            unsafe { *out_json = c.into_raw() };
            clear_last_error();
            AsdStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_last_error("internal panic");
            AsdStatus::Panic
        }
    }
}

unsafe fn connection_ref<'a>(conn: *const AsdConnection) -> Option<&'a ConnectionFile> {
    conn.as_ref().map(|c| &c.file)
}

unsafe fn optional_str<'a>(
    ptr: *const c_char,
    what: &str,
) -> Result<Option<&'a str>, AsdStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Some(s)),
        Err(_) => {
            set_last_error(&format!("{what} is not valid UTF-8"));
            Err(AsdStatus::ParseError)
        }
    }
}

/// Message from the most recent failing call on this thread, empty after a
/// success. The pointer stays valid until the next interface call on the
/// same thread; copy the contents before calling again.
#[no_mangle]
pub extern "C" fn asd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses and validates a connection file given as a JSON string. On
/// success stores a new handle through `out`.
#[no_mangle]
pub unsafe extern "C" fn asd_connection_parse(
    json: *const c_char,
    out: *mut *mut AsdConnection,
) -> AsdStatus {
    if json.is_null() || out.is_null() {
        set_last_error("null argument");
        return AsdStatus::NullPointer;
    }
    let text = match optional_str(json, "connection JSON") {
        Ok(Some(s)) => s,
        Ok(None) => unreachable!("null checked above"),
        Err(status) => return status,
    };
    match catch_unwind(|| ConnectionFile::parse(text)) {
        Ok(Ok(file)) => {
            *out = Box::into_raw(Box::new(AsdConnection { file }));
            clear_last_error();
            AsdStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_last_error("internal panic");
            AsdStatus::Panic
        }
    }
}

/// Releases a handle from [`asd_connection_parse`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn asd_connection_free(conn: *mut AsdConnection) {
    if !conn.is_null() {
        drop(Box::from_raw(conn));
    }
}

/// Releases a string returned through an `out_json` parameter. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn asd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generic slope of the connection along the divisor, as a JSON report.
#[no_mangle]
pub unsafe extern "C" fn asd_katz(
    conn: *const AsdConnection,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    guarded_report(out_json, || cli::cmd_katz(file))
}

/// Specializes over divisor points at scaling exponent `a`. `point` is an
/// optional comma-separated list of `name=value` pairs for the transverse
/// coordinates (null: the points declared in the file). `truncation` is a
/// series order override; pass zero or a negative value for the adaptive
/// default.
#[no_mangle]
pub unsafe extern "C" fn asd_specialize(
    conn: *const AsdConnection,
    a: u32,
    point: *const c_char,
    truncation: i64,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    let point = match optional_str(point, "point specification") {
        Ok(p) => p,
        Err(status) => return status,
    };
    let truncation = (truncation > 0).then_some(truncation);
    guarded_report(out_json, || cli::cmd_specialize(file, a, point, truncation))
}

/// Degree and regularity verdicts for the synthesized presentation at
/// scaling exponent `a` (zero or negative: the generic slope, at least 1).
/// `order` overrides the expansion window when positive.
#[no_mangle]
pub unsafe extern "C" fn asd_check_l(
    conn: *const AsdConnection,
    a: i64,
    order: i64,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    guarded_report(out_json, || {
        cli::cmd_check_l(file, (a > 0).then_some(a), (order > 0).then_some(order))
    })
}

/// Nearby-cycle pieces of the one-variable restriction at the first
/// declared point (or the origin).
#[no_mangle]
pub unsafe extern "C" fn asd_psi(
    conn: *const AsdConnection,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    guarded_report(out_json, || cli::cmd_psi(file))
}

/// Averaged ramified lattice and its stability certificate. `tau` is an
/// optional strip offset such as "0" or "-1/2" (null: 0).
#[no_mangle]
pub unsafe extern "C" fn asd_lattice(
    conn: *const AsdConnection,
    tau: *const c_char,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    let tau = match optional_str(tau, "strip offset") {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded_report(out_json, || cli::cmd_lattice(file, tau))
}

/// Specializes, restricts to the fibre, and decomposes into linear forms at
/// scaling exponent `a` (zero or negative: the generic slope, at least 1).
#[no_mangle]
pub unsafe extern "C" fn asd_decompose(
    conn: *const AsdConnection,
    a: i64,
    out_json: *mut *mut c_char,
) -> AsdStatus {
    let Some(file) = connection_ref(conn) else {
        set_last_error("connection handle is null");
        return AsdStatus::NullPointer;
    };
    guarded_report(out_json, || cli::cmd_decompose(file, (a > 0).then_some(a)))
}
