use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use penreflect_ffi::*;

fn last_error() -> String {
    let p = pr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(spec: &str) -> *mut PrModel {
    let s = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pr_model_parse(s.as_ptr(), &mut m) }, PrStatus::Ok);
    assert!(pr_last_error_message().is_null());
    m
}

#[test]
fn model_round_trip_and_errors() {
    let m = parse("cap:theta0=1");
    let (mut d, mut da) = (0, 0);
    unsafe {
        assert_eq!(pr_model_dims(m, &mut d, &mut da), PrStatus::Ok);
        assert_eq!((d, da), (2, 3));
        let x = [0.0, 0.0, 1.0];
        let mut r = 0.0;
        assert_eq!(pr_boundary_distance(m, x.as_ptr(), 3, &mut r), PrStatus::Ok);
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(pr_boundary_distance(m, x.as_ptr(), 2, &mut r), PrStatus::Domain);
        assert!(last_error().contains("coordinates"));
        assert_eq!(pr_boundary_distance(ptr::null(), x.as_ptr(), 3, &mut r), PrStatus::NullPointer);
        pr_model_free(m);
        pr_model_free(ptr::null_mut());

        let bad = CString::new("torus").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(pr_model_parse(bad.as_ptr(), &mut out), PrStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(pr_model_parse(ptr::null(), &mut out), PrStatus::NullPointer);
    }
}

#[test]
fn skorohod_map_over_the_abi() {
    let t = [0.0, 1.0, 2.0, 3.0];
    let f = [0.0, -1.0, 0.5, -2.0];
    let (mut g, mut l) = ([0.0; 4], [0.0; 4]);
    let s = unsafe { pr_skorohod_map(0.5, t.as_ptr(), f.as_ptr(), 4, g.as_mut_ptr(), l.as_mut_ptr()) };
    assert_eq!(s, PrStatus::Ok);
    assert_eq!(l, [0.0, 0.5, 0.5, 1.5]);
    assert_eq!(g, [0.5, 0.0, 1.5, 0.0]);
    let s = unsafe { pr_skorohod_map(-1.0, t.as_ptr(), f.as_ptr(), 4, g.as_mut_ptr(), l.as_mut_ptr()) };
    assert_eq!(s, PrStatus::InvalidArgument);
}

#[test]
fn simulated_paths() {
    let m = parse("disk");
    let x0 = [0.5, 0.0];
    unsafe {
        for a in [0.0, 0.05] {
            let mut p = ptr::null_mut();
            assert_eq!(pr_simulate(m, x0.as_ptr(), 2, 1.0, 100, 7, a, &mut p), PrStatus::Ok);
            assert_eq!(pr_path_len(p), 101);
            assert_eq!(pr_path_ambient(p), 2);
            let mut pts = vec![0.0; 202];
            assert_eq!(pr_path_copy(p, PrSeries::Points, pts.as_mut_ptr(), pts.len()), PrStatus::Ok);
            assert_eq!(&pts[..2], &x0);
            let mut r = vec![0.0; 101];
            assert_eq!(pr_path_copy(p, PrSeries::BoundaryDistance, r.as_mut_ptr(), 101), PrStatus::Ok);
            assert!(r.iter().all(|&v| v >= 0.0));
            let mut small = [0.0; 10];
            assert_eq!(pr_path_copy(p, PrSeries::LocalTime, small.as_mut_ptr(), 10), PrStatus::BufferTooSmall);
            pr_path_free(p);
        }
        let mut p = ptr::null_mut();
        let outside = [2.0, 0.0];
        assert_eq!(pr_simulate(m, outside.as_ptr(), 2, 1.0, 100, 7, 0.0, &mut p), PrStatus::Domain);
        assert_eq!(pr_simulate(m, x0.as_ptr(), 2, 1.0, 0, 7, 0.0, &mut p), PrStatus::InvalidArgument);
        assert!(p.is_null());
        assert_eq!(pr_path_len(ptr::null()), 0);
        pr_model_free(m);
    }
}

#[test]
fn heat_estimate_over_the_abi() {
    let m = parse("half-line");
    let field = CString::new("const").unwrap();
    let x = [0.3];
    let (mut mean, mut se) = (0.0, 0.0);
    unsafe {
        let s = pr_neumann_heat_mc(m, field.as_ptr(), x.as_ptr(), 1, 0.5, 0.01, 10, 1, &mut mean, &mut se);
        assert_eq!(s, PrStatus::Ok);
        assert_eq!((mean, se), (1.0, 0.0));
        let bad = CString::new("nope").unwrap();
        let s = pr_neumann_heat_mc(m, bad.as_ptr(), x.as_ptr(), 1, 0.5, 0.01, 10, 1, &mut mean, &mut se);
        assert_eq!(s, PrStatus::InvalidArgument);
        pr_model_free(m);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/penreflect.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["pr_model_parse", "pr_simulate", "pr_path_copy", "pr_neumann_heat_mc", "typedef struct PrModel PrModel"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-std=c99", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
