//! Exercises the C boundary end to end: handle lifecycle, status codes,
//! pointer and encoding rejection, agreement with the underlying library,
//! and the documented error taxonomy.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use ou_hyper_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ou_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

unsafe fn evaluator(dim: u32) -> *mut OuEvaluator {
    let mut ev = ptr::null_mut();
    assert_eq!(ou_evaluator_new(dim, &mut ev), OuStatus::Ok);
    assert!(!ev.is_null());
    ev
}

unsafe fn function(spec: &str, dim: u32) -> *mut OuFunction {
    let spec = CString::new(spec).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(ou_function_parse(spec.as_ptr(), dim, &mut f), OuStatus::Ok);
    assert!(!f.is_null());
    f
}

unsafe fn generator(spec: &str) -> *mut OuGenerator {
    let spec = CString::new(spec).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(ou_generator_parse(spec.as_ptr(), &mut c), OuStatus::Ok);
    assert!(!c.is_null());
    c
}

fn blank_verdict() -> OuVerdict {
    OuVerdict {
        lhs: f64::NAN,
        rhs: f64::NAN,
        margin: f64::NAN,
        slack: f64::NAN,
        error_estimate: f64::NAN,
        direction: OuDirection::Leq,
        holds: false,
    }
}

#[test]
fn abi_version_is_stable() {
    assert_eq!(ou_abi_version(), 1);
    assert_eq!(ou_abi_version(), OU_ABI_VERSION);
}

#[test]
fn extremal_equality_crosses_the_boundary() {
    unsafe {
        let ev = evaluator(1);
        let f = function("exp_linear:lambda=0.6", 1);
        let mut v = blank_verdict();
        assert_eq!(ou_check_hc(ev, f, 2.0, 0.5, &mut v), OuStatus::Ok);
        assert!(v.holds);
        assert_eq!(v.direction, OuDirection::Leq);
        // Exponentials meet the contraction with equality.
        assert!(v.margin.abs() <= v.slack, "margin {}", v.margin);
        assert!(v.error_estimate <= v.slack);
        assert!(last_error().is_empty());
        ou_function_free(f);
        ou_evaluator_free(ev);
    }
}

#[test]
fn verdicts_match_the_underlying_library() {
    unsafe {
        let ev = evaluator(1);
        let f = function("exp_linear:lambda=0.4", 1);
        let mut v = blank_verdict();
        assert_eq!(ou_check_rhc(ev, f, 1.5, 0.3, &mut v), OuStatus::Ok);

        let direct = ou_hyper::inequalities::Evaluator::new(1)
            .unwrap()
            .check_rhc(
                &ou_hyper::cli::parse_function("exp_linear:lambda=0.4", 1).unwrap(),
                1.5,
                0.3,
            )
            .unwrap();
        assert_eq!(v.lhs.to_bits(), direct.lhs.to_bits());
        assert_eq!(v.rhs.to_bits(), direct.rhs.to_bits());
        assert_eq!(v.margin.to_bits(), direct.margin.to_bits());
        assert_eq!(v.holds, direct.holds);
        // The reverse family is recorded as a <=-claim on reciprocal norms.
        assert_eq!(v.direction, OuDirection::Leq);
        ou_function_free(f);
        ou_evaluator_free(ev);
    }
}

#[test]
fn generalized_checks_run_through_handles() {
    unsafe {
        let ev = evaluator(1);
        let c = generator("power:p=2");
        let f = function("logistic:a=1,b=1", 1);
        let mut gen = blank_verdict();
        assert_eq!(ou_check_genhc(ev, c, f, 0.5, &mut gen), OuStatus::Ok);
        assert!(gen.holds);
        // The reverse family takes a decreasing generator.
        let c_rev = generator("inv_power:alpha=0.5,kappa=1");
        let mut rev = blank_verdict();
        assert_eq!(ou_check_genrhc(ev, c_rev, f, 0.5, &mut rev), OuStatus::Ok);
        assert!(rev.holds);
        ou_generator_free(c_rev);
        let mut v = blank_verdict();
        assert_eq!(ou_check_glsi(ev, c, f, &mut v), OuStatus::Ok);
        assert!(v.holds);
        let mut lsi = blank_verdict();
        assert_eq!(ou_check_lsi(ev, f, &mut lsi), OuStatus::Ok);
        // The power(2) generator reproduces the classical entropy margin up
        // to the documented factor two.
        assert!((lsi.margin - 2.0 * v.margin).abs() <= 1e-6 * lsi.margin.abs().max(1.0));
        ou_function_free(f);
        ou_generator_free(c);
        ou_evaluator_free(ev);
    }
}

#[test]
fn null_pointers_are_rejected_not_dereferenced() {
    unsafe {
        let mut v = blank_verdict();
        assert_eq!(
            ou_check_hc(ptr::null(), ptr::null(), 2.0, 0.5, &mut v),
            OuStatus::NullPointer
        );
        assert!(last_error().contains("must not be NULL"), "{}", last_error());
        assert_eq!(ou_evaluator_new(1, ptr::null_mut()), OuStatus::NullPointer);

        let ev = evaluator(1);
        let f = function("shifted_gauss_bump:a=1,sigma=1,kappa=0.5", 1);
        assert_eq!(
            ou_check_hc(ev, f, 2.0, 0.5, ptr::null_mut()),
            OuStatus::NullPointer
        );
        ou_function_free(f);
        ou_evaluator_free(ev);
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    unsafe {
        let bytes: [c_char; 3] = [-1, -2, 0];
        let mut f = ptr::null_mut();
        assert_eq!(
            ou_function_parse(bytes.as_ptr(), 1, &mut f),
            OuStatus::InvalidUtf8
        );
        assert!(last_error().contains("UTF-8"), "{}", last_error());
    }
}

#[test]
fn unknown_names_and_bad_dimensions_are_invalid_arguments() {
    unsafe {
        let spec = CString::new("wavelet:a=1").unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(
            ou_function_parse(spec.as_ptr(), 1, &mut f),
            OuStatus::InvalidArgument
        );
        assert!(last_error().contains("wavelet"), "{}", last_error());

        let mut ev = ptr::null_mut();
        assert_eq!(ou_evaluator_new(7, &mut ev), OuStatus::InvalidArgument);
    }
}

#[test]
fn range_overflow_is_its_own_status() {
    unsafe {
        let ev = evaluator(1);
        // exp(f) for f = e^{0.6 x} grows doubly exponentially, so the
        // exponential variant's sides overflow; the library reports that as
        // a range error rather than returning garbage.
        let f = function("exp_linear:lambda=0.6", 1);
        let mut v = blank_verdict();
        assert_eq!(ou_check_ehc(ev, f, 0.5, &mut v), OuStatus::RangeError);
        assert!(!last_error().is_empty());
        assert!(v.lhs.is_nan(), "out-parameter must stay untouched on error");
        ou_function_free(f);
        ou_evaluator_free(ev);
    }
}

#[test]
fn condition_table_is_reachable_from_c() {
    unsafe {
        let cases = [
            ("exm1:alpha=1,beta=1", true, false),
            ("exm1:alpha=1,beta=2", false, false),
            ("inv_power:alpha=0.5,kappa=1", false, true),
        ];
        for (spec, want_c, want_cp) in cases {
            let c = generator(spec);
            let (mut got_c, mut got_cp) = (false, false);
            assert_eq!(
                ou_generator_conditions(c, &mut got_c, &mut got_cp),
                OuStatus::Ok
            );
            assert_eq!((got_c, got_cp), (want_c, want_cp), "{spec}");
            ou_generator_free(c);
        }
    }
}

#[test]
fn free_accepts_null() {
    unsafe {
        ou_evaluator_free(ptr::null_mut());
        ou_function_free(ptr::null_mut());
        ou_generator_free(ptr::null_mut());
    }
}

#[test]
fn error_message_clears_after_the_next_success() {
    unsafe {
        let mut ev = ptr::null_mut();
        assert_eq!(ou_evaluator_new(9, &mut ev), OuStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        let ev = evaluator(1);
        assert!(last_error().is_empty());
        ou_evaluator_free(ev);
    }
}
