//! C ABI for `entmono`: opaque state and report handles, integer status codes and
//! a thread-local last-error message.
//!
//! Every function returns an [`EmStatus`]; outputs go through pointer arguments.
//! Handles are released with their matching `*_free` function, strings returned
//! by the library with [`em_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use entmono::catalog::FamilySpec;
use entmono::cli::{check_report, parse_cut, parse_gamma, parse_measure, KindArg};
use entmono::concentration;
use entmono::measures::evaluate_cut;
use entmono::monogamy::MonogamyReport;
use entmono::qstate::QuantumState;
use entmono::Error;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidIndex = 3,
    DimensionMismatch = 4,
    InvalidState = 5,
    Domain = 6,
    Unsupported = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

/// Opaque quantum state.
pub struct EmState(QuantumState);

/// Opaque inequality report.
pub struct EmReport(MonogamyReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> EmStatus {
    match err {
        Error::InvalidIndex(_) => EmStatus::InvalidIndex,
        Error::DimensionMismatch(..) => EmStatus::DimensionMismatch,
        Error::NotHermitian(..) | Error::NotPsd(..) | Error::InvalidTrace(..) | Error::NotNormalized(..) => {
            EmStatus::InvalidState
        }
        Error::Domain(_) => EmStatus::Domain,
        Error::Unsupported(_) => EmStatus::Unsupported,
        Error::Io(_) | Error::Csv(_) => EmStatus::Io,
        Error::Serde(_) => EmStatus::Parse,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (EmStatus, String)>) -> EmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            EmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            EmStatus::Panic
        }
    }
}

fn lib<T>(r: entmono::Result<T>) -> Result<T, (EmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), (EmStatus, String)> {
    if p.is_null() {
        Err((EmStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EmStatus, String)> {
    non_null(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| (EmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (EmStatus, String)> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

/// # Safety
/// `p` must be null or a live handle from this library.
unsafe fn state_ref<'a>(p: *const EmState) -> Result<&'a QuantumState, (EmStatus, String)> {
    non_null(p, "state")?;
    Ok(&(*p).0)
}

/// # Safety
/// `p` must be null or a live handle from this library.
unsafe fn report_ref<'a>(p: *const EmReport) -> Result<&'a MonogamyReport, (EmStatus, String)> {
    non_null(p, "report")?;
    Ok(&(*p).0)
}

/// Message for the most recent failing call on this thread (empty after success).
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn em_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a state from a family shorthand such as `dicke:4,2` or `ghz:3`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_state_from_family(family: *const c_char, out: *mut *mut EmState) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = lib(FamilySpec::from_str(text(family, "family")?))?;
        let state = lib(spec.build())?;
        *out = Box::into_raw(Box::new(EmState(QuantumState::Pure(state))));
        Ok(())
    })
}

/// Parses a state from its JSON record `{dims, kind, data}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_state_from_json(json: *const c_char, out: *mut *mut EmState) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let state = lib(QuantumState::from_json(text(json, "json")?))?;
        *out = Box::into_raw(Box::new(EmState(state)));
        Ok(())
    })
}

/// Serializes a state to JSON. Release the string with [`em_string_free`].
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_state_to_json(state: *const EmState, out: *mut *mut c_char) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let json = lib(state_ref(state)?.to_json())?;
        *out = CString::new(json).map_err(|e| (EmStatus::Parse, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Number of subsystems of a state.
///
/// # Safety
/// `state` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_state_num_subsystems(state: *const EmState, out: *mut usize) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = state_ref(state)?.register().len();
        Ok(())
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet released.
#[no_mangle]
pub unsafe extern "C" fn em_state_free(state: *mut EmState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Evaluates a measure across a cut such as `0|rest` or `0|1`.
///
/// `measure` is a name with optional inline parameters (`tsallis:0.7`,
/// `unified:1.4,0.6`); NaN `q` or `s` means "not given".
///
/// # Safety
/// String arguments must be NUL-terminated; `state` must be a live handle;
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_measure(
    state: *const EmState,
    measure: *const c_char,
    q: f64,
    s: f64,
    cut: *const c_char,
    out: *mut f64,
) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let state = state_ref(state)?;
        let kind = lib(parse_measure(text(measure, "measure")?, given(q), given(s)))?;
        let (a, b) = lib(parse_cut(text(cut, "cut")?, state.register().len()))?;
        *out = lib(evaluate_cut(kind, state, &a, &b))?.value;
        Ok(())
    })
}

fn given(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Evaluates a monogamy relation (`base`, `thm1` .. `thm9`).
///
/// NaN `alpha` selects the relation's default exponent; `gamma` is `auto` or a
/// number, null meaning `auto`.
///
/// # Safety
/// String arguments must be NUL-terminated or (for `gamma`) null; `state` must be
/// a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_check(
    state: *const EmState,
    kind: *const c_char,
    measure: *const c_char,
    q: f64,
    s: f64,
    cut: *const c_char,
    alpha: f64,
    gamma: *const c_char,
    out: *mut *mut EmReport,
) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let state = state_ref(state)?;
        let kind_arg = lib(KindArg::from_str(text(kind, "kind")?))?;
        let measure = lib(parse_measure(text(measure, "measure")?, given(q), given(s)))?;
        let gamma = lib(parse_gamma(opt_text(gamma, "gamma")?.unwrap_or("auto")))?;
        let report = lib(check_report(state, kind_arg, measure, text(cut, "cut")?, given(alpha), gamma))?;
        *out = Box::into_raw(Box::new(EmReport(report)));
        Ok(())
    })
}

/// Scalar fields of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmReportSummary {
    pub alpha: f64,
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
    pub premise_ok: bool,
    pub upper: bool,
}

/// Copies the scalar fields of a report.
///
/// # Safety
/// `report` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_report_summary(report: *const EmReport, out: *mut EmReportSummary) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = report_ref(report)?;
        *out = EmReportSummary {
            alpha: r.alpha,
            gamma: r.gamma,
            lhs: r.lhs,
            rhs: r.rhs,
            residual: r.residual,
            pass: r.pass,
            premise_ok: r.premise_ok,
            upper: r.kind.is_upper(),
        };
        Ok(())
    })
}

/// Serializes a full report (including per-term weights) to JSON.
/// Release the string with [`em_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_report_to_json(report: *const EmReport, out: *mut *mut c_char) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        let json = serde_json::to_string(report_ref(report)?).map_err(|e| (EmStatus::Parse, e.to_string()))?;
        *out = CString::new(json).map_err(|e| (EmStatus::Parse, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a report handle. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle not yet released.
#[no_mangle]
pub unsafe extern "C" fn em_report_free(report: *mut EmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet released.
#[no_mangle]
pub unsafe extern "C" fn em_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Haar mean of `M` on the `n`-dimensional marginal of a pure state on C^n (x) C^s.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn em_lubkin_mean(n: usize, s: usize, out: *mut f64) -> EmStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 || s == 0 {
            return Err((EmStatus::Domain, "dimensions must be positive".into()));
        }
        *out = concentration::lubkin_mean(n, s);
        Ok(())
    })
}
