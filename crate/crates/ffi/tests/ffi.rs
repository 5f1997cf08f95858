use std::ffi::{c_char, CStr, CString};
use std::ptr;

use kernelforge_ffi::*;
use serde_json::Value;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Value {
    let p = kf_last_error();
    assert!(!p.is_null());
    serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    kf_string_free(p);
    s
}

#[test]
fn gauss_legendre_measure_round_trips_through_json() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(kf_measure_gauss_legendre(-0.5, 0.5, 16, &mut m), KfStatus::Ok);
        let mut mass = 0.0;
        assert_eq!(kf_measure_total_mass(m, &mut mass), KfStatus::Ok);
        assert!((mass - 1.0).abs() < 1e-14);
        let mut s = ptr::null_mut();
        assert_eq!(kf_measure_to_json(m, &mut s), KfStatus::Ok);
        let text = take_string(s);
        let mut back = ptr::null_mut();
        assert_eq!(kf_measure_from_json(cstr(&text).as_ptr(), &mut back), KfStatus::Ok);
        let mut len = 0;
        assert_eq!(kf_measure_len(back, &mut len), KfStatus::Ok);
        assert_eq!(len, 16);
        let mut s2 = ptr::null_mut();
        assert_eq!(kf_measure_to_json(back, &mut s2), KfStatus::Ok);
        assert_eq!(take_string(s2), text);
        kf_measure_free(m);
        kf_measure_free(back);
    }
}

#[test]
fn atoms_reject_negative_weights() {
    unsafe {
        let nodes = [0.0, 1.0, 2.0, 3.0];
        let weights = [1.0, -1.0];
        let mut m = ptr::null_mut();
        let st = kf_measure_from_atoms(nodes.as_ptr(), weights.as_ptr(), 2, 2, &mut m);
        assert_ne!(st, KfStatus::Ok);
        assert!(m.is_null());
        let e = last_error();
        assert!(!e["detail"].as_str().unwrap().is_empty());

        let weights = [1.0, 2.0];
        assert_eq!(
            kf_measure_from_atoms(nodes.as_ptr(), weights.as_ptr(), 2, 2, &mut m),
            KfStatus::Ok
        );
        let mut mass = 0.0;
        assert_eq!(kf_measure_total_mass(m, &mut mass), KfStatus::Ok);
        assert_eq!(mass, 3.0);
        kf_measure_free(m);
    }
}

#[test]
fn sinc_gram_at_integers_is_identity() {
    unsafe {
        let mut k = ptr::null_mut();
        let spec = cstr(r#"{"type": "paley_wiener", "half_bandwidth": 0.5}"#);
        assert_eq!(kf_kernel_from_json(spec.as_ptr(), &mut k), KfStatus::Ok);
        let mut dim = 0;
        assert_eq!(kf_kernel_domain_dim(k, &mut dim), KfStatus::Ok);
        assert_eq!(dim, 1);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(
            kf_kernel_evaluate(k, [0.5].as_ptr(), [0.0].as_ptr(), 1, &mut re, &mut im),
            KfStatus::Ok
        );
        assert!((re - 2.0 / std::f64::consts::PI).abs() < 1e-15 && im == 0.0);

        let pts = [-1.0, 0.0, 1.0];
        let mut g = ptr::null_mut();
        assert_eq!(kf_gram_new(k, pts.as_ptr(), 3, &mut g), KfStatus::Ok);
        let mut n = 0;
        assert_eq!(kf_gram_size(g, &mut n), KfStatus::Ok);
        assert_eq!(n, 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(kf_gram_entry(g, i, j, &mut re, &mut im), KfStatus::Ok);
                assert_eq!((re, im), (if i == j { 1.0 } else { 0.0 }, 0.0));
            }
        }
        assert_eq!(kf_gram_entry(g, 3, 0, &mut re, &mut im), KfStatus::Argument);
        let (mut passed, mut min_eig) = (false, f64::NAN);
        assert_eq!(kf_gram_psd_check(g, &mut passed, &mut min_eig), KfStatus::Ok);
        assert!(passed && (min_eig - 1.0).abs() < 1e-14);
        let mut csv = ptr::null_mut();
        assert_eq!(kf_gram_to_csv(g, &mut csv), KfStatus::Ok);
        assert!(take_string(csv).starts_with("0,1,2\n"));
        kf_gram_free(g);
        kf_kernel_free(k);
    }
}

#[test]
fn errors_carry_kind_and_detail() {
    unsafe {
        let mut k = ptr::null_mut();
        let st = kf_kernel_from_json(cstr(r#"{"type": "matern"}"#).as_ptr(), &mut k);
        assert_eq!(st, KfStatus::UnknownFamily);
        assert!(k.is_null());
        assert_eq!(last_error()["error_kind"], "unknown_family");

        let st = kf_kernel_from_json(cstr("{\"type\":\n}").as_ptr(), &mut k);
        assert_eq!(st, KfStatus::Parse);
        assert!(last_error()["detail"].as_str().unwrap().contains("line 2"));

        assert_eq!(kf_kernel_from_json(ptr::null(), &mut k), KfStatus::NullPointer);
        assert_eq!(kf_measure_total_mass(ptr::null(), &mut 0.0), KfStatus::NullPointer);

        let mut m = ptr::null_mut();
        assert_ne!(kf_measure_gauss_legendre(0.0, 1.0, 0, &mut m), KfStatus::Ok);
        assert!(m.is_null());
    }
}

#[test]
fn success_clears_the_last_error() {
    unsafe {
        let mut k = ptr::null_mut();
        kf_kernel_from_json(cstr("not json").as_ptr(), &mut k);
        assert!(!kf_last_error().is_null());
        let mut m = ptr::null_mut();
        assert_eq!(kf_measure_gauss_legendre(0.0, 1.0, 4, &mut m), KfStatus::Ok);
        assert!(kf_last_error().is_null());
        kf_measure_free(m);
    }
}

#[test]
fn solve_inverse_json_matches_stationarity() {
    let spec = cstr(
        r#"{"kernel_spec": {"type": "paley_wiener", "half_bandwidth": 0.5, "transform_nodes": 128},
            "sample_points": [-1.1, 0.05, 0.9, 2.2],
            "data": [1.0, {"re": -0.5, "im": 0.25}, 0.3, {"re": 0.0, "im": -1.0}],
            "gamma": 0.01}"#,
    );
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(kf_solve_inverse_json(spec.as_ptr(), &mut out), KfStatus::Ok);
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["alpha"].as_array().unwrap().len(), 4);
        assert!(v["normal_residual"].as_f64().unwrap() <= 1e-10);

        let bad =
            cstr(r#"{"kernel_spec": {"type": "paley_wiener"}, "sample_points": [0], "data": [1, 2], "gamma": 0}"#);
        assert_eq!(kf_solve_inverse_json(bad.as_ptr(), &mut out), KfStatus::Argument);
    }
}

#[test]
fn error_bound_json_reports_ratio_below_one() {
    let spec = cstr(
        r#"{"g_kernel": {"type": "gaussian_mixture", "measure": {"nodes": [1.0], "weights": [1.0]}},
            "measure": {"gauss_legendre": {"a": 0.0, "b": 1.0, "n": 64}},
            "observation_nodes": [0.2, 0.8],
            "representer": {"centers": [0.5], "coeffs": [1.0]},
            "x": 0.3}"#,
    );
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(kf_error_bound_json(spec.as_ptr(), &mut out), KfStatus::Ok);
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        let r = v["ratio"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&r));
        assert_eq!(v["power_values"].as_array().unwrap().len(), 64);
    }
}
