//! The Wolff potential `W_{β,p}(|y|^a u^q)(x)` of a radial profile, its
//! inner/outer split at `t = |x|/2`, and the ratio `R = u / W`.
//!
//! `W(x) = ∫_0^∞ φ(t) dt/t` with `φ(t) = [I(t) / t^{n-pβ}]^{1/(p-1)}` and
//! `I(t) = ∫_{B_t(x)} |y|^a u^q`. The `t`-integral runs in `ln t` between a
//! small cut `t0 = 1e-6 |x|` and a truncation radius `T`; both ends are closed
//! with the exact power laws `φ ~ t^{pβ/(p-1)}` (small balls) and
//! `φ ~ t^{-κ∞}` (large balls).

use std::cell::RefCell;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::{integrate_log, QuadratureConfig};
use crate::radgeom::{ball_integral_radial, diverges_at_origin, diverges_at_tail, Profile, SourceDensity};

const INNER_CUT: f64 = 1e-6;
const FIRST_TRUNCATION: f64 = 1e3;
const TRUNCATION_GROWTH: f64 = 100.0;
const MAX_EXTENSIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WolffEvaluation {
    pub radius: f64,
    pub value: f64,
    /// `∫_0^{|x|/2} φ dt/t`.
    pub w1: f64,
    /// `∫_{|x|/2}^∞ φ dt/t`, including the analytic tail.
    pub w2: f64,
    pub truncation_radius: f64,
    /// Closed-form contribution of `t > T`.
    pub tail_closure: f64,
    /// Estimated error of that closure.
    pub tail_estimate: f64,
    pub error_estimate: f64,
}

struct Evaluator<'p> {
    density: SourceDensity<'p>,
    d: f64,
    /// `n - pβ`
    codim: f64,
    inv: f64,
    inner: QuadratureConfig,
}

impl Evaluator<'_> {
    fn phi(&self, t: f64) -> Result<f64> {
        let ball = ball_integral_radial(&self.density, self.d, t, &self.inner)?;
        if ball.value <= 0.0 {
            return Ok(0.0);
        }
        Ok((ball.value / t.powf(self.codim)).powf(self.inv))
    }

    /// `∫ φ(t) dt/t` over consecutive breakpoints, in `ln t`.
    fn integrate(&self, pts: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)> {
        let failure = RefCell::new(None);
        let res = integrate_log(
            |t| {
                // after the first failure the result is discarded anyway
                if failure.borrow().is_some() {
                    return 0.0;
                }
                match self.phi(t) {
                    Ok(v) => v / t,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            pts,
            cfg,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let r = res?;
        Ok((r.value, r.error))
    }
}

fn sorted_points(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = extra.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    pts
}

/// `W_{β,p}(|y|^a u^q)` at `|x| = x`.
pub fn wolff_potential(
    u: &Profile,
    params: &ProblemParams,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<WolffEvaluation> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("the Wolff potential needs |x| > 0 (got {x})")));
    }
    let (n, p, q, a, beta) = (params.nf(), params.p(), params.q(), params.a(), params.beta());
    let pb = p * beta;
    let density = SourceDensity::new(u, a, q, params.n())?;
    let (origin, tail) = density.shell_exponents();
    if origin.is_some_and(diverges_at_origin) {
        return Err(Error::DivergentPotential(format!(
            "|y|^a u^q is not integrable at the origin (n + a - q*sigma0 = {})",
            origin.unwrap_or(0.0) + 1.0
        )));
    }
    // decay exponent of φ at infinity
    let kappa = match tail {
        Some(e) if diverges_at_tail(e) => {
            let k = (n - pb - e - 1.0) / (p - 1.0);
            if k <= 1e-10 {
                return Err(Error::DivergentPotential(format!(
                    "q*sigma - a - p*beta = {}",
                    k * (p - 1.0)
                )));
            }
            k
        }
        _ => (n - pb) / (p - 1.0),
    };
    let ev = Evaluator {
        density,
        d: x,
        codim: n - pb,
        inv: 1.0 / (p - 1.0),
        inner: quad.nested(0.01),
    };
    let support = u.support();
    let mut marks = vec![0.5 * x, x, 2.0 * x];
    if support.is_finite() {
        marks.extend([x - support, support - x, x + support]);
    }

    // inner part, with φ ~ t^{pβ/(p-1)} below t0
    let t0 = INNER_CUT * x;
    let (w1_body, w1_err) = ev.integrate(&sorted_points(t0, 0.5 * x, &marks), quad)?;
    let w1 = w1_body + ev.phi(t0)? * (p - 1.0) / pb;

    // outer part, truncated at T and closed with φ(T) T^κ t^{-κ}
    let mut big_t = FIRST_TRUNCATION * x;
    if support.is_finite() {
        big_t = big_t.max(2.0 * (x + support));
    }
    let (mut w2_body, mut w2_err) = ev.integrate(&sorted_points(0.5 * x, big_t, &marks), quad)?;
    let mut closure;
    let mut tail_estimate;
    let mut extensions = 0;
    loop {
        let phi_t = ev.phi(big_t)?;
        closure = phi_t / kappa;
        let phi_next = ev.phi(1.1 * big_t)?;
        tail_estimate = if phi_t > 0.0 && phi_next > 0.0 {
            let local = -(phi_next / phi_t).ln() / 1.1f64.ln();
            if local > 0.0 {
                phi_t * (1.0 / local - 1.0 / kappa).abs()
            } else {
                closure
            }
        } else {
            0.0
        };
        let value = w1 + w2_body + closure;
        if tail_estimate <= 0.1 * quad.rel_tol * value || extensions == MAX_EXTENSIONS {
            break;
        }
        let next = big_t * TRUNCATION_GROWTH;
        let (v, e) = ev.integrate(&[big_t, next], quad)?;
        w2_body += v;
        w2_err += e;
        big_t = next;
        extensions += 1;
    }
    let w2 = w2_body + closure;
    Ok(WolffEvaluation {
        radius: x,
        value: w1 + w2,
        w1,
        w2,
        truncation_radius: big_t,
        tail_closure: closure,
        tail_estimate,
        error_estimate: w1_err + w2_err + tail_estimate,
    })
}

/// `(W_1, W_2)`: the parts of the `t`-integral below and above `|x|/2`.
pub fn wolff_split(
    u: &Profile,
    params: &ProblemParams,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let ev = wolff_potential(u, params, x, quad)?;
    Ok((ev.w1, ev.w2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioReport {
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub evaluations: Vec<WolffEvaluation>,
    /// `u` at each radius.
    pub values: Vec<f64>,
}

impl RatioReport {
    /// `max R / min R - 1`.
    pub fn spread(&self) -> f64 {
        self.upper / self.lower - 1.0
    }

    /// Columns `radius,u,w,w1,w2,ratio`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,u,w,w1,w2,ratio\n");
        for (i, ev) in self.evaluations.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                ev.radius, self.values[i], ev.value, ev.w1, ev.w2, self.ratios[i]
            );
        }
        s
    }
}

/// `R(x) = u(x) / W_{β,p}(|y|^a u^q)(x)` at each radius, evaluated in
/// parallel.
pub fn ratio_r(
    u: &Profile,
    params: &ProblemParams,
    radii: &[f64],
    quad: &QuadratureConfig,
) -> Result<RatioReport> {
    if radii.is_empty() {
        return Err(Error::Domain("ratio needs at least one radius".into()));
    }
    let evaluations = radii
        .par_iter()
        .map(|&r| wolff_potential(u, params, r, quad))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = radii.iter().map(|&r| u.value(r)).collect();
    let ratios: Vec<f64> = values
        .iter()
        .zip(&evaluations)
        .map(|(u, ev)| u / ev.value)
        .collect();
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(0.0, f64::max);
    Ok(RatioReport {
        radii: radii.to_vec(),
        ratios,
        lower,
        upper,
        evaluations,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radgeom::{BubbleProfile, BumpProfile, PowerLawProfile};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p2() -> ProblemParams {
        ProblemParams::pde(3, 2.0, 4.0, 0.0).unwrap()
    }

    fn singular() -> Profile {
        Profile::PowerLaw(PowerLawProfile::new((2.0f64 / 9.0).powf(1.0 / 3.0), 2.0 / 3.0).unwrap())
    }

    /// `∫ g(ρ) 4πρ² / max(d, ρ) dρ` by composite Simpson in `ln ρ` with
    /// power-law end pieces; valid for `p = 2, n = 3, β = 1` only.
    fn newtonian(g: impl Fn(f64) -> f64, d: f64, lo: f64, hi: f64, e_lo: f64, e_hi: f64) -> f64 {
        let h = |r: f64| g(r) * 4.0 * PI * r * r / d.max(r);
        let simpson = |a: f64, b: f64| {
            let m = 20_000;
            let (sa, sb) = (a.ln(), b.ln());
            let step = (sb - sa) / m as f64;
            let mut acc = 0.0;
            for i in 0..=m {
                let s = sa + step * i as f64;
                let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * h(s.exp()) * s.exp();
            }
            acc * step / 3.0
        };
        // exponents of h below lo and above hi
        h(lo) * lo / (e_lo + 1.0) + simpson(lo, d) + simpson(d, hi) + h(hi) * hi / (-e_hi - 1.0)
    }

    #[test]
    fn singular_solution_has_constant_ratio() {
        let u = singular();
        let c4 = (2.0f64 / 9.0).powf(4.0 / 3.0);
        let ev = wolff_potential(&u, &p2(), 1.0, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(ev.value, 18.0 * PI * c4, max_relative = 1e-7);
        assert_relative_eq!(ev.w1 + ev.w2, ev.value, max_relative = 1e-15);
        let oracle = newtonian(|r| c4 * r.powf(-8.0 / 3.0), 1.0, 1e-8, 1e8, -2.0 / 3.0, -5.0 / 3.0);
        assert_relative_eq!(ev.value, oracle, max_relative = 1e-7);
        let rep = ratio_r(&u, &p2(), &[0.01, 0.1, 1.0, 10.0, 100.0], &QuadratureConfig::default()).unwrap();
        assert!(rep.spread() < 1e-6, "{rep:?}");
        assert_relative_eq!(rep.lower, 1.0 / (4.0 * PI), max_relative = 1e-7);
    }

    #[test]
    fn bubble_matches_newtonian_oracle() {
        let params = ProblemParams::pde(3, 2.0, 5.0, 0.0).unwrap();
        let u: Profile = BubbleProfile::extremal(&params).unwrap().into();
        for d in [0.05, 1.0, 20.0] {
            let ev = wolff_potential(&u, &params, d, &QuadratureConfig::default()).unwrap();
            let g = |r: f64| u.value(r).powi(5);
            let oracle = newtonian(g, d, 1e-6, 1e6, 2.0, -4.0);
            assert_relative_eq!(ev.value, oracle, max_relative = 1e-6);
        }
    }

    #[test]
    fn inner_part_scales_like_the_power_law() {
        let u = singular();
        let e = (2.0 - 4.0 * 2.0 / 3.0) / 1.0;
        let cfg = QuadratureConfig::default();
        let (a1, a2) = wolff_split(&u, &p2(), 1.3, &cfg).unwrap();
        let (b1, b2) = wolff_split(&u, &p2(), 2.6, &cfg).unwrap();
        assert_relative_eq!(b1 / a1, 2f64.powf(e), max_relative = 1e-7);
        assert_relative_eq!(b2 / a2, 2f64.powf(e), max_relative = 1e-7);
    }

    #[test]
    fn bump_far_away() {
        let u: Profile = BumpProfile::new(1.0, 1.0, 2.0).unwrap().into();
        let cfg = QuadratureConfig::default();
        let ev = wolff_potential(&u, &p2(), 100.0, &cfg).unwrap();
        assert_eq!(ev.w1, 0.0);
        assert!(ev.w2 > 0.0);
        // W |x|^{fast} ≈ total mass for p = 2, n = 3
        let mass = SourceDensity::new(&u, 0.0, 4.0, 3).unwrap().total_mass(&cfg).unwrap();
        assert_relative_eq!(ev.value * 100.0, mass, max_relative = 1e-3);
    }

    #[test]
    fn tiny_profile_gives_tiny_potential() {
        let u: Profile = BumpProfile::new(1e-20, 1.0, 2.0).unwrap().into();
        let ev = wolff_potential(&u, &p2(), 0.5, &QuadratureConfig::default()).unwrap();
        assert!(ev.value < 1e-70);
    }

    #[test]
    fn slow_tails_make_the_potential_diverge() {
        // q σ - a <= pβ
        let u = Profile::PowerLaw(PowerLawProfile::new(1.0, 0.4).unwrap());
        assert!(matches!(
            wolff_potential(&u, &p2(), 1.0, &QuadratureConfig::default()),
            Err(Error::DivergentPotential(_))
        ));
    }

    #[test]
    fn monotone_in_the_profile() {
        let small: Profile = BubbleProfile::new(1.0, 1.0, 2.0, 0.5).unwrap().into();
        let big: Profile = BubbleProfile::new(1.2, 1.0, 2.0, 0.5).unwrap().into();
        let params = ProblemParams::pde(3, 2.0, 5.0, 0.0).unwrap();
        for d in [0.1, 1.0, 10.0] {
            let a = wolff_potential(&small, &params, d, &QuadratureConfig::default()).unwrap();
            let b = wolff_potential(&big, &params, d, &QuadratureConfig::default()).unwrap();
            assert!(b.value > a.value);
        }
    }
}
