//! C ABI over `wolfflab`.
//!
//! Every function returns a [`WlStatus`]; results go through out-pointers.
//! Handles are opaque and owned by the caller once returned, and each has a
//! matching `_free`. On failure the message of the last error on the calling
//! thread is available from [`wl_last_error_message`]. Panics never cross the
//! boundary; they surface as [`WlStatus::Panic`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wolfflab::exponents::{nonexistence_sequence, Verdict};
use wolfflab::params::{classify_regime, ProblemParams, Regime};
use wolfflab::quadrature::QuadratureConfig;
use wolfflab::radgeom::{BubbleProfile, Profile, RadialProfile};
use wolfflab::shoot::{pde_residual, shoot_radial, singular_profile, Classification, ShootingResult};
use wolfflab::wolff::wolff_potential;
use wolfflab::Error;

/// Result code of every `wl_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AssumptionViolation = 3,
    NotApplicable = 4,
    Divergent = 5,
    QuadratureFailure = 6,
    IterationBudget = 7,
    ShootingFailure = 8,
    InvalidProfile = 9,
    Panic = 10,
    Other = 11,
}

impl From<&Error> for WlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::AssumptionViolation(_) => WlStatus::AssumptionViolation,
            Error::NotApplicable(_) | Error::NotCritical { .. } => WlStatus::NotApplicable,
            Error::Domain(_) | Error::Config(_) => WlStatus::InvalidArgument,
            Error::DivergentIntegral(_) | Error::DivergentPotential(_) => WlStatus::Divergent,
            Error::QuadratureFailure { .. } => WlStatus::QuadratureFailure,
            Error::IterationBudgetExceeded(_) => WlStatus::IterationBudget,
            Error::StepSizeUnderflow(_)
            | Error::ClassificationAmbiguous { .. }
            | Error::WindowTooNarrow(..)
            | Error::DerivativeUnavailable(_) => WlStatus::ShootingFailure,
            Error::InvalidProfile(_) => WlStatus::InvalidProfile,
            Error::Io(_) => WlStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: WlStatus, msg: impl Into<String>) -> WlStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), WlStatus>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            WlStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(WlStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn status(self) -> Result<T, WlStatus>;
}

impl<T> OrStatus<T> for wolfflab::Result<T> {
    fn status(self) -> Result<T, WlStatus> {
        self.map_err(|e| fail(WlStatus::from(&e), e.to_string()))
    }
}

fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, WlStatus> {
    // SAFETY: the caller passes either null or a pointer obtained from this
    // library that has not been freed.
    unsafe { p.as_ref() }.ok_or_else(|| fail(WlStatus::NullPointer, format!("{what} is null")))
}

fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), WlStatus> {
    if out.is_null() {
        return Err(fail(WlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and, per the contract, valid for a write of T.
    unsafe { out.write(value) };
    Ok(())
}

/// Validated parameter tuple `(n, p, q, a, beta)`.
pub struct WlParams(ProblemParams);

/// A radial profile `u(|x|)`.
pub struct WlProfile(Profile);

/// Outcome of a shooting run, including the computed profile.
pub struct WlShooting(ShootingResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WlExponents {
    pub s0: f64,
    pub p_star: f64,
    pub q_critical: f64,
    pub q_liouville: f64,
    pub fast_rate: f64,
    pub slow_rate: f64,
    pub integrability_floor: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlRegime {
    Nonexistence = 0,
    Subcritical = 1,
    Critical = 2,
    Supercritical = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlVerdict {
    HitNonpositive = 0,
    ConvergesTo = 1,
    Diverges = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WlSequenceSummary {
    pub verdict: WlVerdict,
    /// Stopping index when `verdict` is `HitNonpositive`, else 0.
    pub j0: usize,
    /// Limit when `verdict` is `ConvergesTo`, else NaN.
    pub limit: f64,
    /// Total number of terms, including `a_0`.
    pub len: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlClassification {
    Crossing = 0,
    FastDecay = 1,
    SlowDecay = 2,
    Undetermined = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WlShootingSummary {
    pub classification: WlClassification,
    /// First zero of `u`; NaN unless `Crossing`.
    pub crossing_radius: f64,
    /// NaN when no rate was fitted.
    pub fitted_rate: f64,
    pub fast_rate: f64,
    pub slow_rate: f64,
    /// Number of profile nodes.
    pub nodes: usize,
}

fn new_params(out: *mut *mut WlParams, build: impl FnOnce() -> wolfflab::Result<ProblemParams>) -> WlStatus {
    guard(|| {
        let p = build().status()?;
        write(out, Box::into_raw(Box::new(WlParams(p))), "out")
    })
}

/// Validates `(n, p, q, a, beta)` against the standing assumptions
/// (`n >= 3`, `1 < p <= 2`, `q > p - 1`, `0 <= -a < p beta < n`).
#[no_mangle]
pub extern "C" fn wl_params_new(n: u32, p: f64, q: f64, a: f64, beta: f64, out: *mut *mut WlParams) -> WlStatus {
    new_params(out, || ProblemParams::new(n, p, q, a, beta))
}

/// As [`wl_params_new`] but only requires `q > 0`; for the exponent
/// iterations.
#[no_mangle]
pub extern "C" fn wl_params_new_iteration(
    n: u32,
    p: f64,
    q: f64,
    a: f64,
    beta: f64,
    out: *mut *mut WlParams,
) -> WlStatus {
    new_params(out, || ProblemParams::for_iteration(n, p, q, a, beta))
}

/// # Safety
/// `params` must be null or come from `wl_params_new*` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn wl_params_free(params: *mut WlParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

#[no_mangle]
pub extern "C" fn wl_derive_exponents(params: *const WlParams, out: *mut WlExponents) -> WlStatus {
    guard(|| {
        let ex = deref(params, "params")?.0.exponents();
        write(
            out,
            WlExponents {
                s0: ex.s0,
                p_star: ex.p_star,
                q_critical: ex.q_critical,
                q_liouville: ex.q_liouville,
                fast_rate: ex.fast_rate,
                slow_rate: ex.slow_rate,
                integrability_floor: ex.integrability_floor,
            },
            "out",
        )
    })
}

/// `tol` is the relative band for calling `q` critical.
#[no_mangle]
pub extern "C" fn wl_classify(
    params: *const WlParams,
    tol: f64,
    regime: *mut WlRegime,
    lp_impossible: *mut bool,
) -> WlStatus {
    guard(|| {
        if !(tol >= 0.0) {
            return Err(fail(WlStatus::InvalidArgument, format!("tol must be nonnegative (got {tol})")));
        }
        let rep = classify_regime(&deref(params, "params")?.0, tol);
        let r = match rep.regime {
            Regime::Nonexistence => WlRegime::Nonexistence,
            Regime::Subcritical => WlRegime::Subcritical,
            Regime::Critical => WlRegime::Critical,
            Regime::Supercritical => WlRegime::Supercritical,
        };
        write(regime, r, "regime")?;
        if !lp_impossible.is_null() {
            write(lp_impossible, rep.lp_impossible, "lp_impossible")?;
        }
        Ok(())
    })
}

/// Runs the nonexistence iteration. Up to `cap` terms are copied into
/// `terms` (which may be null when `cap` is 0); `summary.len` reports how
/// many there are in total.
///
/// # Safety
/// `terms` must be valid for `cap` writes of `double`.
#[no_mangle]
pub unsafe extern "C" fn wl_nonexistence_sequence(
    params: *const WlParams,
    max_iter: usize,
    terms: *mut f64,
    cap: usize,
    summary: *mut WlSequenceSummary,
) -> WlStatus {
    guard(|| {
        if cap > 0 && terms.is_null() {
            return Err(fail(WlStatus::NullPointer, "terms is null"));
        }
        let seq = nonexistence_sequence(&deref(params, "params")?.0, max_iter).status()?;
        let (verdict, j0, limit) = match seq.verdict {
            Verdict::HitNonpositive { j0 } => (WlVerdict::HitNonpositive, j0, f64::NAN),
            Verdict::ConvergesTo { limit } => (WlVerdict::ConvergesTo, 0, limit),
            Verdict::Diverges => (WlVerdict::Diverges, 0, f64::NAN),
        };
        let k = cap.min(seq.terms.len());
        if k > 0 {
            // SAFETY: terms is non-null and valid for cap >= k writes.
            unsafe { ptr::copy_nonoverlapping(seq.terms.as_ptr(), terms, k) };
        }
        write(
            summary,
            WlSequenceSummary {
                verdict,
                j0,
                limit,
                len: seq.terms.len(),
            },
            "summary",
        )
    })
}

fn new_profile(out: *mut *mut WlProfile, build: impl FnOnce() -> Result<Profile, WlStatus>) -> WlStatus {
    guard(|| {
        let p = build()?;
        write(out, Box::into_raw(Box::new(WlProfile(p))), "out")
    })
}

/// The exact singular solution `c r^{-t}` (PDE case, `beta = 1`).
#[no_mangle]
pub extern "C" fn wl_singular_profile(params: *const WlParams, out: *mut *mut WlProfile) -> WlStatus {
    new_profile(out, || Ok(singular_profile(&deref(params, "params")?.0).status()?.into()))
}

/// The finite-energy extremal at the critical exponent.
#[no_mangle]
pub extern "C" fn wl_bubble_profile(params: *const WlParams, out: *mut *mut WlProfile) -> WlStatus {
    new_profile(out, || Ok(BubbleProfile::extremal(&deref(params, "params")?.0).status()?.into()))
}

/// A tabulated profile, extended by `u ~ r^{inner_exponent}` below the grid
/// and `u ~ r^{-tail_exponent}` above it.
///
/// # Safety
/// `r` and `u` must each be valid for `len` reads of `double`.
#[no_mangle]
pub unsafe extern "C" fn wl_profile_from_grid(
    r: *const f64,
    u: *const f64,
    len: usize,
    inner_exponent: f64,
    tail_exponent: f64,
    out: *mut *mut WlProfile,
) -> WlStatus {
    new_profile(out, || {
        if r.is_null() || u.is_null() {
            return Err(fail(WlStatus::NullPointer, "grid arrays are null"));
        }
        // SAFETY: both arrays are non-null and valid for len reads.
        let (rs, us) = unsafe { (std::slice::from_raw_parts(r, len), std::slice::from_raw_parts(u, len)) };
        let g = RadialProfile::new(rs.to_vec(), us.to_vec(), inner_exponent, tail_exponent).status()?;
        Ok(g.into())
    })
}

#[no_mangle]
pub extern "C" fn wl_profile_value(profile: *const WlProfile, r: f64, out: *mut f64) -> WlStatus {
    guard(|| {
        if !(r >= 0.0) {
            return Err(fail(WlStatus::InvalidArgument, format!("r must be nonnegative (got {r})")));
        }
        write(out, deref(profile, "profile")?.0.value(r), "out")
    })
}

/// # Safety
/// `profile` must be null or come from this library and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn wl_profile_free(profile: *mut WlProfile) {
    if !profile.is_null() {
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Relative residual of the radial equation at `r`.
#[no_mangle]
pub extern "C" fn wl_pde_residual(
    profile: *const WlProfile,
    params: *const WlParams,
    r: f64,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let v = pde_residual(&deref(profile, "profile")?.0, &deref(params, "params")?.0, r).status()?;
        write(out, v, "out")
    })
}

/// `W_{beta,p}(|y|^a u^q)` at `|x| = x`, to relative tolerance `rel_tol`.
#[no_mangle]
pub extern "C" fn wl_wolff_potential(
    profile: *const WlProfile,
    params: *const WlParams,
    x: f64,
    rel_tol: f64,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        if !(rel_tol > 0.0) {
            return Err(fail(WlStatus::InvalidArgument, format!("rel_tol must be positive (got {rel_tol})")));
        }
        let quad = QuadratureConfig::with_rel_tol(rel_tol);
        let ev = wolff_potential(&deref(profile, "profile")?.0, &deref(params, "params")?.0, x, &quad).status()?;
        write(out, ev.value, "out")
    })
}

/// Shoots from `u(0) = alpha` out to `r_max` and classifies the decay.
#[no_mangle]
pub extern "C" fn wl_shoot(
    params: *const WlParams,
    alpha: f64,
    r_max: f64,
    ode_tol: f64,
    out: *mut *mut WlShooting,
) -> WlStatus {
    guard(|| {
        let run = shoot_radial(alpha, &deref(params, "params")?.0, r_max, ode_tol).status()?;
        write(out, Box::into_raw(Box::new(WlShooting(run))), "out")
    })
}

#[no_mangle]
pub extern "C" fn wl_shooting_summary(shot: *const WlShooting, out: *mut WlShootingSummary) -> WlStatus {
    guard(|| {
        let s = &deref(shot, "shot")?.0;
        let classification = match s.classification {
            Classification::Crossing { .. } => WlClassification::Crossing,
            Classification::FastDecay => WlClassification::FastDecay,
            Classification::SlowDecay => WlClassification::SlowDecay,
            Classification::Undetermined => WlClassification::Undetermined,
        };
        write(
            out,
            WlShootingSummary {
                classification,
                crossing_radius: s.crossing_radius().unwrap_or(f64::NAN),
                fitted_rate: s.fitted_rate.unwrap_or(f64::NAN),
                fast_rate: s.fast_rate,
                slow_rate: s.slow_rate,
                nodes: s.profile.grid().len(),
            },
            "out",
        )
    })
}

/// A copy of the computed profile as a separate handle.
#[no_mangle]
pub extern "C" fn wl_shooting_profile(shot: *const WlShooting, out: *mut *mut WlProfile) -> WlStatus {
    new_profile(out, || Ok(deref(shot, "shot")?.0.profile.clone().into()))
}

/// # Safety
/// `shot` must be null or come from [`wl_shoot`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn wl_shooting_free(shot: *mut WlShooting) {
    if !shot.is_null() {
        drop(unsafe { Box::from_raw(shot) });
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`) and returns its full length in bytes, excluding the
/// terminator. Returns 0 after a successful call.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn wl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let k = msg.len().min(cap - 1);
            // SAFETY: buf is valid for cap > k writes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, k);
                *buf.add(k) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
