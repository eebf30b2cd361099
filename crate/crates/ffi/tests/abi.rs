use std::ffi::{c_char, CStr};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::ptr;

use wolfflab_ffi::*;

fn params(n: u32, p: f64, q: f64, a: f64) -> *mut WlParams {
    let mut out = ptr::null_mut();
    assert_eq!(wl_params_new(n, p, q, a, 1.0, &mut out), WlStatus::Ok);
    out
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let len = unsafe { wl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(len, s.len());
    s
}

#[test]
fn exponents_and_regime() {
    let pp = params(3, 2.0, 5.0, 0.0);
    let mut ex = WlExponents::default();
    assert_eq!(wl_derive_exponents(pp, &mut ex), WlStatus::Ok);
    assert_eq!((ex.s0, ex.q_critical, ex.q_liouville, ex.fast_rate, ex.slow_rate), (6.0, 5.0, 3.0, 1.0, 0.5));
    let mut regime = WlRegime::Nonexistence;
    let mut lp = false;
    assert_eq!(wl_classify(pp, 1e-12, &mut regime, &mut lp), WlStatus::Ok);
    assert_eq!(regime, WlRegime::Critical);
    assert!(lp);
    unsafe { wl_params_free(pp) };
}

#[test]
fn invalid_tuple_reports_assumptions() {
    let mut out = ptr::null_mut();
    assert_eq!(wl_params_new(3, 2.0, 5.0, 0.5, 1.0, &mut out), WlStatus::AssumptionViolation);
    assert!(out.is_null());
    assert!(last_error().contains("a must be <= 0"), "{}", last_error());
    assert_eq!(wl_derive_exponents(ptr::null(), &mut WlExponents::default()), WlStatus::NullPointer);
}

#[test]
fn nonexistence_sequence_copies_terms() {
    let mut pp = ptr::null_mut();
    assert_eq!(wl_params_new_iteration(3, 2.0, 1.5, 0.0, 1.0, &mut pp), WlStatus::Ok);
    let mut terms = [0.0; 4];
    let mut sum = WlSequenceSummary {
        verdict: WlVerdict::Diverges,
        j0: 0,
        limit: 0.0,
        len: 0,
    };
    let st = unsafe { wl_nonexistence_sequence(pp, 100, terms.as_mut_ptr(), terms.len(), &mut sum) };
    assert_eq!(st, WlStatus::Ok);
    // a_0 = (n - p)/(p - 1) = 1, a_j = 1.5 a_{j-1} - 2
    assert_eq!(sum.verdict, WlVerdict::HitNonpositive);
    assert_eq!((sum.j0, sum.len), (1, 2));
    assert_eq!(&terms[..2], &[1.0, -0.5]);
    unsafe { wl_params_free(pp) };
}

#[test]
fn singular_profile_residual_and_wolff_ratio() {
    let pp = params(3, 2.0, 4.0, 0.0);
    let mut prof = ptr::null_mut();
    assert_eq!(wl_singular_profile(pp, &mut prof), WlStatus::Ok);
    let mut res = 1.0;
    assert_eq!(wl_pde_residual(prof, pp, 2.0, &mut res), WlStatus::Ok);
    assert!(res.abs() < 1e-13);
    let (mut w, mut u) = (0.0, 0.0);
    assert_eq!(wl_wolff_potential(prof, pp, 1.0, 1e-9, &mut w), WlStatus::Ok);
    assert_eq!(wl_profile_value(prof, 1.0, &mut u), WlStatus::Ok);
    assert!((u / w * 4.0 * PI - 1.0).abs() < 1e-8);
    unsafe {
        wl_profile_free(prof);
        wl_params_free(pp);
    }
}

#[test]
fn grid_profile_round_trip_and_errors() {
    let r: Vec<f64> = (0..50).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64)).collect();
    let u: Vec<f64> = r.iter().map(|x| 1.0 / (1.0 + x * x)).collect();
    let mut prof = ptr::null_mut();
    let st = unsafe { wl_profile_from_grid(r.as_ptr(), u.as_ptr(), r.len(), 0.0, 2.0, &mut prof) };
    assert_eq!(st, WlStatus::Ok);
    let mut v = 0.0;
    assert_eq!(wl_profile_value(prof, r[10], &mut v), WlStatus::Ok);
    assert_eq!(v, u[10]);
    assert_eq!(wl_profile_value(prof, -1.0, &mut v), WlStatus::InvalidArgument);
    unsafe { wl_profile_free(prof) };

    let bad = [1.0, 0.5];
    let mut out = ptr::null_mut();
    let st = unsafe { wl_profile_from_grid(bad.as_ptr(), bad.as_ptr(), 2, 0.0, 1.0, &mut out) };
    assert_eq!(st, WlStatus::InvalidProfile);
    assert!(!last_error().is_empty());
}

#[test]
fn shooting_handles() {
    let pp = params(3, 2.0, 5.0, 0.0);
    let mut shot = ptr::null_mut();
    assert_eq!(wl_shoot(pp, 3f64.powf(0.25), 1e4, 1e-10, &mut shot), WlStatus::Ok);
    let mut sum = WlShootingSummary {
        classification: WlClassification::Undetermined,
        crossing_radius: 0.0,
        fitted_rate: 0.0,
        fast_rate: 0.0,
        slow_rate: 0.0,
        nodes: 0,
    };
    assert_eq!(wl_shooting_summary(shot, &mut sum), WlStatus::Ok);
    assert_eq!(sum.classification, WlClassification::FastDecay);
    assert!(sum.crossing_radius.is_nan());
    assert!((sum.fitted_rate - 1.0).abs() < 0.02);
    let mut prof = ptr::null_mut();
    assert_eq!(wl_shooting_profile(shot, &mut prof), WlStatus::Ok);
    // the profile outlives the run it came from
    unsafe { wl_shooting_free(shot) };
    let mut v = 0.0;
    assert_eq!(wl_profile_value(prof, 1.0, &mut v), WlStatus::Ok);
    assert!((v - 3f64.powf(0.25) / 2f64.sqrt()).abs() < 1e-6);

    // q = 4 has no critical extremal
    let p4 = params(3, 2.0, 4.0, 0.0);
    let mut bubble = ptr::null_mut();
    assert_eq!(wl_bubble_profile(p4, &mut bubble), WlStatus::NotApplicable);
    unsafe {
        wl_profile_free(prof);
        wl_params_free(pp);
        wl_params_free(p4);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wolfflab.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["wl_params_new", "wl_shoot", "wl_wolff_potential", "wl_last_error_message"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"]).arg(&header).output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
