//! Radial solutions of `-Δ_p u = |x|^a u^q` (`β = 1`): exact singular
//! solutions, residual checks, and shooting from a regular center with
//! decay-rate classification.
//!
//! Shooting integrates the flux form on `s = ln r`:
//!
//! ```text
//! U' = -(|w| / r^{n-1})^{1/(p-1)},   w' = -r^{n-1+a} U^q,   w = r^{n-1}|U'|^{p-2}U'
//! ```
//!
//! which never evaluates `|U'|^{p-2}` and so stays regular at the center.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{dopri_step, error_norm, next_step};
use crate::params::ProblemParams;
use crate::radgeom::{log_grid, PowerLawProfile, Profile, RadialProfile};

pub const DEFAULT_R_MAX: f64 = 1e4;
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
/// Output nodes per decade of radius.
pub const NODES_PER_DECADE: usize = 100;
/// Half-width of each rate band, as a fraction of `|fastRate - slowRate|`.
pub const RATE_BAND: f64 = 0.05;
/// Largest RMS deviation (in `ln u`) of a fit that may classify.
pub const RATE_FIT_TOL: f64 = 0.15;
/// Series start `r0 = START_SCALE * alpha^{-1/θ}`.
const START_SCALE: f64 = 1e-6;

/// `c |x|^{-t}` with `t = (p+a)/(q-p+1)` and
/// `c = t^{(p-1)/(q-p+1)} [n-1-(p-1)(t+1)]^{1/(q-p+1)}`.
pub fn singular_profile(params: &ProblemParams) -> Result<PowerLawProfile> {
    if !params.is_pde_mode() {
        return Err(Error::NotApplicable("singular solutions need beta = 1".into()));
    }
    let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
    let m = q - p + 1.0;
    let t = (p + a) / m;
    let bracket = n - 1.0 - (p - 1.0) * (t + 1.0);
    if !(bracket > 0.0) || q <= params.exponents().q_liouville {
        return Err(Error::NotApplicable(format!(
            "n - 1 - (p-1)(t+1) = {bracket} must be positive (q must exceed the Liouville exponent)"
        )));
    }
    let c = t.powf((p - 1.0) / m) * bracket.powf(1.0 / m);
    PowerLawProfile::new(c, t)
}

/// `[-|U'|^{p-2}((p-1)U'' + (n-1)U'/r) - r^a U^q] / max(r^a U^q, ε)`.
pub fn pde_residual(u: &Profile, params: &ProblemParams, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("residual needs r > 0 (got {r})")));
    }
    let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
    let (val, d1, d2) = u.derivatives(r)?;
    if d1 == 0.0 && p < 2.0 {
        return Err(Error::Domain(format!("U'({r}) = 0: the operator is singular there")));
    }
    let lhs = -d1.abs().powf(p - 2.0) * ((p - 1.0) * d2 + (n - 1.0) * d1 / r);
    let rhs = r.powf(a) * val.max(0.0).powf(q);
    Ok((lhs - rhs) / rhs.max(f64::MIN_POSITIVE))
}

/// Least-squares decay rate `-d ln u / d ln r` over the grid nodes in
/// `window`, with the RMS deviation of the fit.
pub fn fit_decay_rate(u: &RadialProfile, window: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = window;
    let slack = 1e-12;
    if !(lo > 0.0)
        || !(hi >= 10.0 * lo * (1.0 - slack))
        || lo < u.r_min() * (1.0 - slack)
        || hi > u.r_max() * (1.0 + slack)
    {
        return Err(Error::WindowTooNarrow(lo, hi));
    }
    let pts: Vec<(f64, f64)> = u
        .grid()
        .iter()
        .zip(u.values())
        .filter(|(r, _)| **r >= lo * (1.0 - slack) && **r <= hi * (1.0 + slack))
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::WindowTooNarrow(lo, hi));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    Ok((0.0 - slope, (rss / m).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum Classification {
    Crossing { r0: f64 },
    FastDecay,
    SlowDecay,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShootingResult {
    pub alpha: f64,
    pub classification: Classification,
    /// `None` when the solution crosses zero.
    pub fitted_rate: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub fit_residual: Option<f64>,
    pub fast_rate: f64,
    pub slow_rate: f64,
    #[serde(skip)]
    pub profile: RadialProfile,
    /// `w = r^{n-1}|U'|^{p-2}U'` at the profile nodes.
    #[serde(skip)]
    pub flux: Vec<f64>,
}

impl ShootingResult {
    pub fn crossing_radius(&self) -> Option<f64> {
        match self.classification {
            Classification::Crossing { r0 } => Some(r0),
            _ => None,
        }
    }

    /// Columns `r,u,w`.
    pub fn profile_csv(&self) -> String {
        let mut s = String::from("r,u,w\n");
        for ((r, u), w) in self.profile.grid().iter().zip(self.profile.values()).zip(&self.flux) {
            let _ = writeln!(s, "{r},{u},{w}");
        }
        s
    }
}

struct RadialSystem {
    n: f64,
    p: f64,
    q: f64,
    a: f64,
}

impl RadialSystem {
    /// Derivatives of `(U, w)` with respect to `s = ln r`.
    fn rhs(&self, s: f64, y: &[f64; 2]) -> [f64; 2] {
        let r = s.exp();
        let du = self.derivative(r, y[1]);
        let src = y[0].abs().powf(self.q) * y[0].signum();
        let dw = -r.powf(self.n - 1.0 + self.a) * src;
        [r * du, r * dw]
    }

    fn derivative(&self, r: f64, w: f64) -> f64 {
        (w.abs() / r.powf(self.n - 1.0)).powf(1.0 / (self.p - 1.0)) * w.signum()
    }
}

/// Shoots from `U(0) = alpha, U'(0) = 0` out to `r_max` (or the first zero)
/// and classifies the decay on `[r_max/100, r_max]`.
pub fn shoot_radial(alpha: f64, params: &ProblemParams, r_max: f64, ode_tol: f64) -> Result<ShootingResult> {
    if !params.is_pde_mode() {
        return Err(Error::NotApplicable("shooting solves the PDE case beta = 1".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive (got {alpha})")));
    }
    if !(r_max >= 1e4) || !r_max.is_finite() {
        return Err(Error::Domain(format!("r_max must be at least 1e4 (got {r_max})")));
    }
    if !(ode_tol > 0.0 && ode_tol < 1e-2) {
        return Err(Error::Domain(format!("ode tolerance must lie in (0, 1e-2) (got {ode_tol})")));
    }
    let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
    let ex = params.exponents();
    let sys = RadialSystem { n, p, q, a };
    let r0 = START_SCALE * alpha.powf(-1.0 / ex.slow_rate);
    if r0 >= r_max / 1e3 {
        return Err(Error::Domain(format!("alpha = {alpha} puts the center scale beyond r_max")));
    }
    // two-term expansion at the center
    let aq = alpha.powf(q);
    let w0 = -aq * r0.powf(n + a) / (n + a);
    let u0 = alpha - (aq / (n + a)).powf(1.0 / (p - 1.0)) * r0.powf((p + a) / (p - 1.0)) * (p - 1.0) / (p + a);

    let nodes = log_grid(r0, r_max, NODES_PER_DECADE);
    let f = |s: f64, y: &[f64; 2]| sys.rhs(s, y);
    let floor = [1e-14 * alpha, 0.0];
    let mut y = [u0, w0];
    let mut s = r0.ln();
    let mut h: f64 = 1e-3;
    let mut grid = vec![r0];
    let mut values = vec![u0];
    let mut flux = vec![w0];
    let mut crossing = None;

    'outer: for &target in &nodes[1..] {
        let s_end = target.ln();
        while s_end - s > 1e-13 * s.abs().max(1.0) {
            if h < 1e-12 * s.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow(s.exp()));
            }
            let step = h.min(s_end - s);
            let (y_new, err) = dopri_step(&f, s, &y, step);
            let norm = error_norm(&err, &y, &y_new, ode_tol, &floor);
            if !norm.is_finite() || norm > 1.0 {
                h = if norm.is_finite() { next_step(step, norm) } else { 0.2 * step };
                continue;
            }
            if y_new[0] <= 0.0 {
                crossing = Some(bisect_crossing(&f, s, &y, step, ode_tol));
                break 'outer;
            }
            if y_new[1] >= y[1] {
                return Err(Error::Domain(format!(
                    "flux failed to decrease at r = {:e}",
                    (s + step).exp()
                )));
            }
            s += step;
            y = y_new;
            // a step shortened to land on a node says nothing against h
            h = if step < h { h.max(next_step(step, norm)) } else { next_step(step, norm) };
        }
        grid.push(target);
        values.push(y[0]);
        flux.push(y[1]);
    }

    let slopes: Vec<f64> = grid
        .iter()
        .zip(values.iter().zip(&flux))
        .map(|(&r, (&u, &w))| r * sys.derivative(r, w) / u)
        .collect();

    if let Some(rc) = crossing {
        let tail = 0.0 - slopes[slopes.len() - 1];
        let profile = RadialProfile::with_log_slopes(grid, values, slopes, 0.0, tail)
            .map_err(|_| Error::NotApplicable(format!("solution crosses zero at r = {rc:e} before any output node")))?;
        return Ok(ShootingResult {
            alpha,
            classification: Classification::Crossing { r0: rc },
            fitted_rate: None,
            fit_window: None,
            fit_residual: None,
            fast_rate: ex.fast_rate,
            slow_rate: ex.slow_rate,
            profile,
            flux,
        });
    }

    let window = (r_max / 100.0, r_max);
    let provisional = RadialProfile::with_log_slopes(grid.clone(), values.clone(), slopes.clone(), 0.0, ex.fast_rate)?;
    let (rate, residual) = fit_decay_rate(&provisional, window)?;
    let band = RATE_BAND * (ex.fast_rate - ex.slow_rate).abs();
    let near_fast = (rate - ex.fast_rate).abs() <= band;
    let near_slow = (rate - ex.slow_rate).abs() <= band;
    let classification = if residual > RATE_FIT_TOL {
        Classification::Undetermined
    } else {
        match (near_fast, near_slow) {
            (true, true) => return Err(Error::ClassificationAmbiguous { rate }),
            (true, false) => Classification::FastDecay,
            (false, true) => Classification::SlowDecay,
            (false, false) => Classification::Undetermined,
        }
    };
    let tail = match classification {
        Classification::FastDecay => ex.fast_rate,
        Classification::SlowDecay => ex.slow_rate,
        _ => rate,
    };
    Ok(ShootingResult {
        alpha,
        classification,
        fitted_rate: Some(rate),
        fit_window: Some(window),
        fit_residual: Some(residual),
        fast_rate: ex.fast_rate,
        slow_rate: ex.slow_rate,
        profile: provisional.with_tail_exponent(tail),
        flux,
    })
}

/// Radius where `U` reaches zero inside the step `[s, s + h]`, refined by
/// bisection on single steps from `s`.
fn bisect_crossing<F>(f: &F, s: f64, y: &[f64; 2], h: f64, tol: f64) -> f64
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > tol * h.max(tol) && hi - lo > 1e-15 * s.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if dopri_step(f, s, y, mid).0[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (s + 0.5 * (lo + hi)).exp()
}
