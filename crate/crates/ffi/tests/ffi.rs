use std::ffi::{CStr, CString};
use std::ptr;

use entmono_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(em_last_error()) }.to_string_lossy().into_owned()
}

fn family(name: &str) -> *mut EmState {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { em_state_from_family(cs(name).as_ptr(), &mut out) }, EmStatus::Ok);
    assert!(!out.is_null());
    out
}

#[test]
fn measure_dicke_focus() {
    let state = family("dicke:4,2");
    let mut n = 0usize;
    let mut value = f64::NAN;
    unsafe {
        assert_eq!(em_state_num_subsystems(state, &mut n), EmStatus::Ok);
        assert_eq!(
            em_measure(state, cs("concurrence").as_ptr(), f64::NAN, f64::NAN, cs("0|rest").as_ptr(), &mut value),
            EmStatus::Ok
        );
        em_state_free(state);
    }
    assert_eq!(n, 4);
    assert!((value - 1.0).abs() < 1e-12);
    assert_eq!(last_error(), "");
}

#[test]
fn measure_with_separate_parameter() {
    let state = family("bell");
    let mut value = f64::NAN;
    unsafe {
        assert_eq!(
            em_measure(state, cs("tsallis").as_ptr(), 2.0, f64::NAN, cs("0|1").as_ptr(), &mut value),
            EmStatus::Ok
        );
        em_state_free(state);
    }
    assert!((value - 0.5).abs() < 1e-12);
}

#[test]
fn check_report_summary_and_json() {
    let state = family("dicke:4,2");
    let mut report = ptr::null_mut();
    let mut summary = EmReportSummary::default();
    let mut json = ptr::null_mut();
    unsafe {
        let status = em_check(
            state,
            cs("thm2").as_ptr(),
            cs("concurrence").as_ptr(),
            f64::NAN,
            f64::NAN,
            cs("0|rest").as_ptr(),
            2.0,
            cs("1").as_ptr(),
            &mut report,
        );
        assert_eq!(status, EmStatus::Ok, "{}", last_error());
        assert_eq!(em_report_summary(report, &mut summary), EmStatus::Ok);
        assert_eq!(em_report_to_json(report, &mut json), EmStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        em_string_free(json);
        em_report_free(report);
        em_state_free(state);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "thm2");
        assert_eq!(v["rhs_terms"].as_array().unwrap().len(), 3);
    }
    assert!((summary.residual - 2.0 / 3.0).abs() < 1e-12);
    assert!(summary.pass && summary.premise_ok && !summary.upper);
    assert_eq!(summary.gamma, 1.0);
}

#[test]
fn check_upper_bound_with_default_exponent_and_auto_gamma() {
    let state = family("w:4");
    let mut report = ptr::null_mut();
    let mut summary = EmReportSummary::default();
    unsafe {
        let status = em_check(
            state,
            cs("thm8").as_ptr(),
            cs("concurrence").as_ptr(),
            f64::NAN,
            f64::NAN,
            cs("0|1,2,3").as_ptr(),
            f64::NAN,
            ptr::null(),
            &mut report,
        );
        assert_eq!(status, EmStatus::Ok, "{}", last_error());
        em_report_summary(report, &mut summary);
        em_report_free(report);
        em_state_free(state);
    }
    assert!(summary.upper && summary.pass);
    assert_eq!(summary.alpha, 2.0);
}

#[test]
fn state_json_round_trip() {
    let state = family("ghz:3");
    let mut json = ptr::null_mut();
    let mut back = ptr::null_mut();
    let mut value = f64::NAN;
    unsafe {
        assert_eq!(em_state_to_json(state, &mut json), EmStatus::Ok);
        assert_eq!(em_state_from_json(json, &mut back), EmStatus::Ok);
        em_measure(back, cs("eof").as_ptr(), f64::NAN, f64::NAN, cs("0|rest").as_ptr(), &mut value);
        em_string_free(json);
        em_state_free(back);
        em_state_free(state);
    }
    assert!((value - 1.0).abs() < 1e-12);
}

#[test]
fn error_codes_and_messages() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(em_state_from_family(cs("dicke:4,9").as_ptr(), &mut out), EmStatus::Domain);
        assert!(out.is_null());
        assert!(last_error().contains("Dicke"));
        assert_eq!(em_state_from_family(cs("dfs:1,1").as_ptr(), &mut out), EmStatus::InvalidState);
        assert_eq!(em_state_from_family(ptr::null(), &mut out), EmStatus::NullPointer);
        assert_eq!(em_state_from_family(cs("bell").as_ptr(), ptr::null_mut()), EmStatus::NullPointer);
        assert_eq!(em_state_from_json(cs("{not json").as_ptr(), &mut out), EmStatus::Parse);

        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(em_state_from_family(bad_utf8.as_ptr().cast(), &mut out), EmStatus::InvalidUtf8);

        let state = family("ghz:3");
        let mut value = 0.0;
        assert_eq!(
            em_measure(state, cs("concurrence").as_ptr(), f64::NAN, f64::NAN, cs("0|5").as_ptr(), &mut value),
            EmStatus::InvalidIndex
        );
        assert_eq!(
            em_measure(state, cs("renyi").as_ptr(), 1.0, f64::NAN, cs("0|rest").as_ptr(), &mut value),
            EmStatus::Domain
        );
        assert_eq!(
            em_measure(state, cs("eof").as_ptr(), f64::NAN, f64::NAN, cs("0,1|2").as_ptr(), &mut value),
            EmStatus::Ok
        );
        let mut report = ptr::null_mut();
        assert_eq!(
            em_check(
                state,
                cs("thm42").as_ptr(),
                cs("concurrence").as_ptr(),
                f64::NAN,
                f64::NAN,
                cs("0|rest").as_ptr(),
                f64::NAN,
                ptr::null(),
                &mut report
            ),
            EmStatus::Domain
        );
        em_state_free(state);
        em_state_free(ptr::null_mut());
        em_report_free(ptr::null_mut());
        em_string_free(ptr::null_mut());
    }
}

#[test]
fn mixed_marginal_across_larger_cut_is_unsupported() {
    let state = family("w:4");
    let mut value = 0.0;
    let status = unsafe {
        em_measure(state, cs("eof").as_ptr(), f64::NAN, f64::NAN, cs("0|1,2").as_ptr(), &mut value)
    };
    unsafe { em_state_free(state) };
    assert_eq!(status, EmStatus::Unsupported);
}

#[test]
fn lubkin_mean_matches_closed_form() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(em_lubkin_mean(4, 4, &mut v), EmStatus::Ok);
        assert_eq!(em_lubkin_mean(0, 4, &mut v), EmStatus::Domain);
    }
    assert!((v - (2.0 - 2.0 * 8.0 / 17.0)).abs() < 1e-12);
}

#[test]
fn header_declares_entry_points() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/entmono.h")).unwrap();
    for name in [
        "em_last_error",
        "em_state_from_family",
        "em_state_from_json",
        "em_state_to_json",
        "em_state_num_subsystems",
        "em_state_free",
        "em_measure",
        "em_check",
        "em_report_summary",
        "em_report_to_json",
        "em_report_free",
        "em_string_free",
        "em_lubkin_mean",
        "EM_STATUS_OK",
        "typedef struct EmState EmState",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
