use std::ffi::{CStr, CString};
use std::ptr;

use semiclab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(semiclab_last_error()) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn harmonic_window_through_the_abi() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(semiclab_model_new(cstr("harmonic").as_ptr(), &mut model), SemiclabStatus::Ok);
        let mut dim = 0;
        assert_eq!(semiclab_model_dimension(model, &mut dim), SemiclabStatus::Ok);
        assert_eq!(dim, 1);

        let mut window = ptr::null_mut();
        assert_eq!(semiclab_window_solve(model, 1.0, 4.0, 0.01, &mut window), SemiclabStatus::Ok, "{}", last_error());
        let mut len = 0;
        assert_eq!(semiclab_window_len(window, &mut len), SemiclabStatus::Ok);
        assert_eq!(len, 4);
        let mut count = 0;
        assert_eq!(semiclab_window_count(window, &mut count), SemiclabStatus::Ok);
        assert_eq!(count, 4);
        for (j, exact) in [0.97, 0.99, 1.01, 1.03].into_iter().enumerate() {
            let (mut value, mut weight) = (0.0, 0);
            assert_eq!(semiclab_window_eigenvalue(window, j, &mut value, &mut weight), SemiclabStatus::Ok);
            assert!((value - exact).abs() < 1e-5);
            assert_eq!(weight, 1);
        }
        let (mut value, mut weight) = (0.0, 0);
        assert_eq!(semiclab_window_eigenvalue(window, 4, &mut value, &mut weight), SemiclabStatus::Index);
        assert!(last_error().contains("out of range"));

        let mut obs = ptr::null_mut();
        assert_eq!(semiclab_observable_parse(cstr("x^2+xi^2").as_ptr(), &mut obs), SemiclabStatus::Ok);
        let mut values = [0.0; 4];
        let mut written = 0;
        let status = semiclab_window_measure(window, obs, SemiclabQuantization::Weyl, values.as_mut_ptr(), 4, &mut written);
        assert_eq!(status, SemiclabStatus::Ok, "{}", last_error());
        assert_eq!(written, 4);
        for (v, exact) in values.iter().zip([0.97, 0.99, 1.01, 1.03]) {
            assert!((v - exact).abs() < 1e-4, "{v} vs {exact}");
        }
        let status = semiclab_window_measure(window, obs, SemiclabQuantization::AntiWick, values.as_mut_ptr(), 2, &mut written);
        assert_eq!(status, SemiclabStatus::Index);

        let mut avg = 0.0;
        let mut x2 = ptr::null_mut();
        assert_eq!(semiclab_observable_parse(cstr("x^2").as_ptr(), &mut x2), SemiclabStatus::Ok);
        assert_eq!(semiclab_liouville_average(model, x2, 1.0, &mut avg), SemiclabStatus::Ok);
        assert!((avg - 0.5).abs() < 1e-6);

        semiclab_observable_free(x2);
        semiclab_observable_free(obs);
        semiclab_window_free(window);
        semiclab_model_free(model);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(semiclab_model_new(cstr("nope").as_ptr(), &mut model), SemiclabStatus::Config);
        assert!(model.is_null());
        assert!(last_error().contains("unknown model"));
        assert_eq!(semiclab_model_new(ptr::null(), &mut model), SemiclabStatus::NullPointer);
        assert_eq!(semiclab_model_new(cstr("harmonic").as_ptr(), ptr::null_mut()), SemiclabStatus::NullPointer);

        let mut obs = ptr::null_mut();
        assert_eq!(semiclab_observable_parse(cstr("x^2+").as_ptr(), &mut obs), SemiclabStatus::Config);

        assert_eq!(semiclab_model_new(cstr("quad-max").as_ptr(), &mut model), SemiclabStatus::Ok);
        assert_eq!(semiclab_observable_parse(cstr("1").as_ptr(), &mut obs), SemiclabStatus::Ok);
        let mut avg = 0.0;
        let status = semiclab_liouville_average(model, obs, 0.0, &mut avg);
        assert_ne!(status, SemiclabStatus::Ok);
        assert!(!last_error().is_empty());
        assert_eq!(semiclab_liouville_average(model, obs, 0.5, &mut avg), SemiclabStatus::Ok);
        assert!(last_error().is_empty());

        let mut e = 1.0;
        assert_eq!(semiclab_catalog_critical_energy(cstr("two-max").as_ptr(), &mut e), SemiclabStatus::Ok);
        assert!((e - 4.0 / 27.0).abs() < 1e-15);

        semiclab_observable_free(obs);
        semiclab_model_free(model);
        semiclab_model_free(ptr::null_mut());
    }
}

#[test]
fn status_codes_are_stable() {
    assert_eq!(SemiclabStatus::Ok as i32, 0);
    assert_eq!(SemiclabStatus::Hypothesis as i32, 2);
    assert_eq!(SemiclabStatus::Numerical as i32, 3);
    assert_eq!(SemiclabStatus::Config as i32, 4);
    assert_eq!(SemiclabStatus::NullPointer as i32, 10);
    assert_eq!(SemiclabStatus::Index as i32, 11);
    assert_eq!(SemiclabStatus::Panic as i32, 12);
    let v = unsafe { CStr::from_ptr(semiclab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/semiclab.h")).unwrap();
    for name in [
        "semiclab_last_error",
        "semiclab_version",
        "semiclab_model_new",
        "semiclab_model_free",
        "semiclab_model_dimension",
        "semiclab_catalog_critical_energy",
        "semiclab_observable_parse",
        "semiclab_observable_free",
        "semiclab_window_solve",
        "semiclab_window_free",
        "semiclab_window_len",
        "semiclab_window_count",
        "semiclab_window_eigenvalue",
        "semiclab_window_measure",
        "semiclab_liouville_average",
        "typedef struct SemiclabModel SemiclabModel",
        "SEMICLAB_STATUS_NULL_POINTER = 10",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
