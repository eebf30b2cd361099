//! Spheres cut by off-center balls, and integrals of radial densities over
//! balls `B_t(x)`.

mod profile;

pub use profile::{
    log_grid, Asymptote, BubbleProfile, BumpProfile, PowerLawProfile, Profile, RadialProfile,
};
pub(crate) use profile::Window;

use std::f64::consts::PI;

use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result, Side};
use crate::quadrature::{integrate, integrate_log, Integral, QuadratureConfig};

/// `|S^{n-1}| = 2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    sphere_area(n) / n as f64
}

/// Fraction of the sphere `|y| = rho` lying in the closed ball of radius `t`
/// around a point at distance `d` from the origin.
pub fn cap_fraction(rho: f64, d: f64, t: f64, n: u32) -> f64 {
    if rho <= t - d {
        return 1.0;
    }
    if rho >= d + t || rho <= d - t {
        return 0.0;
    }
    cut_shell_fraction(rho - (t - d).abs(), d, t, n)
}

/// Cap fraction on the sphere `ρ = |t - d| + σ` of a cut shell. With
/// `cos θ* = (d² + ρ² − t²)/(2dρ)`, both factors of `1 ∓ cos θ*` are written
/// in `σ`, which keeps full relative precision next to `ρ = |t - d|`.
fn cut_shell_fraction(sigma: f64, d: f64, t: f64, n: u32) -> f64 {
    let rho = (t - d).abs() + sigma;
    let two = 2.0 * d * rho;
    let (one_minus, one_plus) = if t >= d {
        ((2.0 * (t - d) + sigma) * (2.0 * d - sigma) / two, sigma * (2.0 * t + sigma) / two)
    } else {
        (sigma * (2.0 * t - sigma) / two, (2.0 * (d - t) + sigma) * (2.0 * d + sigma) / two)
    };
    fraction_from(one_minus, one_plus, n)
}

fn fraction_from(one_minus: f64, one_plus: f64, n: u32) -> f64 {
    let one_minus = one_minus.clamp(0.0, 2.0);
    let one_plus = one_plus.clamp(0.0, 2.0);
    if n == 3 {
        return 0.5 * one_minus;
    }
    let sin2 = (one_minus * one_plus).clamp(0.0, 1.0);
    let half = 0.5 * beta_reg(0.5 * (n as f64 - 1.0), 0.5, sin2);
    if one_minus <= 1.0 {
        half
    } else {
        1.0 - half
    }
}

/// `(n-1)`-dimensional measure of `{|y| = rho} ∩ {|y - x| ≤ t}` with `|x| = d`.
pub fn cap_measure(rho: f64, d: f64, t: f64, n: u32) -> Result<f64> {
    if [rho, d, t].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "cap measure needs finite nonnegative rho, d, t (got {rho}, {d}, {t})"
        )));
    }
    if n < 2 {
        return Err(Error::Domain(format!("cap measure needs n >= 2 (got {n})")));
    }
    Ok(sphere_area(n) * rho.powi(n as i32 - 1) * cap_fraction(rho, d, t, n))
}

/// `∫_a^b x^{k-1} dx / a^k`-style helper: `(e^{kL} - 1)/k` computed stably,
/// i.e. `∫_0^L e^{k s} ds`.
fn exp_integral(k: f64, l: f64) -> f64 {
    let z = k * l;
    if z.abs() < 1e-12 {
        l * (1.0 + 0.5 * z)
    } else {
        l * z.exp_m1() / z
    }
}

/// `e + 1 <= 0` with a relative band: a logarithmic divergence counts as
/// divergent.
pub(crate) fn diverges_at_origin(e: f64) -> bool {
    e + 1.0 <= 1e-10 * e.abs().max(1.0)
}

pub(crate) fn diverges_at_tail(e: f64) -> bool {
    e + 1.0 >= -1e-10 * e.abs().max(1.0)
}

/// A nonnegative radial integrand `h(r)` that behaves like an exact power
/// law `r^{origin}` below `window.lo` and `r^{tail}` above `window.hi`
/// (`None` = identically zero there).
pub(crate) struct ClosedIntegrand<'w, H> {
    pub h: H,
    pub origin: Option<f64>,
    pub tail: Option<f64>,
    pub window: &'w Window,
}

impl<H: Fn(f64) -> f64> ClosedIntegrand<'_, H> {
    /// Which ends of `(0, ∞)` make `∫ h` diverge.
    pub fn divergence(&self) -> Option<Side> {
        Side::combine(
            self.origin.is_some_and(diverges_at_origin),
            self.tail.is_some_and(diverges_at_tail),
        )
    }

    /// `∫_a^b h(r) dr` for `0 <= a < b <= ∞`.
    pub fn integral(&self, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral> {
        let (lo, hi) = (self.window.lo, self.window.hi);
        let mut total = Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        };
        if !(b > a) {
            return Ok(total);
        }
        let origin_side = a == 0.0 && self.origin.is_some_and(diverges_at_origin);
        let tail_side = b.is_infinite() && self.tail.is_some_and(diverges_at_tail);
        if let Some(side) = Side::combine(origin_side, tail_side) {
            return Err(Error::DivergentIntegral(side));
        }
        // below the window
        if a < lo {
            if let Some(e) = self.origin {
                let m = b.min(lo);
                let hm = (self.h)(m);
                total.value += if a == 0.0 {
                    hm * m / (e + 1.0)
                } else {
                    // ∫_a^m h = h(m) m ∫_{-L}^0 e^{(e+1)s} ds
                    hm * m * exp_integral(-(e + 1.0), (m / a).ln())
                };
            }
        }
        // inside the window
        let (ma, mb) = (a.max(lo), b.min(hi));
        if mb > ma {
            let bp = &self.window.breakpoints;
            let mut pts = vec![ma];
            let start = bp.partition_point(|&x| x <= ma);
            let end = bp.partition_point(|&x| x < mb);
            if start < end {
                pts.extend_from_slice(&bp[start..end]);
            }
            pts.push(mb);
            let inner = integrate_log(&self.h, &pts, cfg)?;
            total.value += inner.value;
            total.error += inner.error;
            total.panels += inner.panels;
        }
        // above the window
        if b > hi {
            if let Some(e) = self.tail {
                let m = a.max(hi);
                let hm = (self.h)(m);
                total.value += if b.is_infinite() {
                    hm * m / (-e - 1.0)
                } else {
                    hm * m * exp_integral(e + 1.0, (b / m).ln())
                };
            }
        }
        Ok(total)
    }
}

/// The radial density `g(ρ) = ρ^a U(ρ)^q` in `R^n`, with its cumulative
/// mass `M(R) = ∫_{B_R(0)} g`.
#[derive(Debug, Clone)]
pub struct SourceDensity<'p> {
    profile: &'p Profile,
    weight: f64,
    power: f64,
    n: u32,
    area: f64,
    window: Window,
    table: Option<MassTable>,
}

/// Exact cumulative masses of a log-log linear grid profile at its nodes.
#[derive(Debug, Clone)]
struct MassTable {
    below: f64,
    cumulative: Vec<f64>,
}

impl<'p> SourceDensity<'p> {
    pub fn new(profile: &'p Profile, weight: f64, power: f64, n: u32) -> Result<Self> {
        if !(power > 0.0) || !weight.is_finite() || n < 2 {
            return Err(Error::Domain(format!(
                "density needs q > 0, finite a, n >= 2 (got q={power}, a={weight}, n={n})"
            )));
        }
        let mut dens = SourceDensity {
            profile,
            weight,
            power,
            n,
            area: sphere_area(n),
            window: profile.window(),
            table: None,
        };
        if let Profile::Grid(g) = profile {
            dens.table = Some(dens.build_table(g));
        }
        Ok(dens)
    }

    pub fn profile(&self) -> &Profile {
        self.profile
    }
    pub fn dimension(&self) -> u32 {
        self.n
    }

    /// `g(ρ)`.
    pub fn value(&self, rho: f64) -> f64 {
        let u = self.profile.value(rho);
        if u <= 0.0 {
            return 0.0;
        }
        rho.powf(self.weight) * u.powf(self.power)
    }

    /// Exponent `e` with `ρ^{n-1} g(ρ) ~ ρ^e`, at the origin and at infinity.
    pub(crate) fn shell_exponents(&self) -> (Option<f64>, Option<f64>) {
        let shift = |a: Asymptote| match a {
            Asymptote::Power(e) => Some(self.n as f64 - 1.0 + self.weight + self.power * e),
            Asymptote::Vanishes => None,
        };
        let (o, t) = self.profile.value_asymptotes();
        (shift(o), shift(t))
    }

    /// Whether `∫_{R^n} g` is finite at infinity.
    pub fn finite_total_mass(&self) -> bool {
        !self.shell_exponents().1.is_some_and(diverges_at_tail)
    }

    fn shell(&self) -> ClosedIntegrand<'_, impl Fn(f64) -> f64 + '_> {
        let (origin, tail) = self.shell_exponents();
        let n1 = self.n as i32 - 1;
        ClosedIntegrand {
            h: move |r: f64| self.value(r) * r.powi(n1),
            origin,
            tail,
            window: &self.window,
        }
    }

    fn build_table(&self, g: &RadialProfile) -> MassTable {
        let (n, a, q) = (self.n as f64, self.weight, self.power);
        let grid = g.grid();
        let vals = g.values();
        // below the grid: ∫_0^{r0} ρ^{n-1+a} u0^q (ρ/r0)^{-qσ0} dρ
        let e0 = n - 1.0 + a - q * g.inner_exponent();
        let below = if diverges_at_origin(e0) {
            f64::INFINITY
        } else {
            grid[0].powf(n + a) * vals[0].powf(q) / (e0 + 1.0)
        };
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = below;
        cumulative.push(acc);
        for i in 0..grid.len() - 1 {
            acc += segment_mass(g, i, grid[i + 1], n, a, q);
            cumulative.push(acc);
        }
        MassTable { below, cumulative }
    }

    /// `∫_{B_R(0)} g`.
    pub fn mass(&self, radius: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if radius <= 0.0 {
            return Ok(0.0);
        }
        if let (Profile::Grid(g), Some(tab)) = (self.profile, &self.table) {
            return Ok(self.area * grid_mass(g, tab, radius, self.n as f64, self.weight, self.power)?);
        }
        if let Profile::PowerLaw(pl) = self.profile {
            let e = self.n as f64 - 1.0 + self.weight - self.power * pl.exponent;
            if diverges_at_origin(e) {
                return Err(Error::DivergentIntegral(Side::Origin));
            }
            return Ok(self.area * pl.coeff.powf(self.power) * radius.powf(e + 1.0) / (e + 1.0));
        }
        Ok(self.area * self.shell().integral(0.0, radius, cfg)?.value)
    }

    /// `∫_{R^n} g`, or `DivergentIntegral` with the offending side.
    pub fn total_mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let shell = self.shell();
        if let Some(side) = shell.divergence() {
            return Err(Error::DivergentIntegral(side));
        }
        Ok(self.area * shell.integral(0.0, f64::INFINITY, cfg)?.value)
    }
}

/// `∫_{r0}^{end} r^{n-1+a} U^q dr` over (part of) segment `i`.
fn segment_mass(g: &RadialProfile, i: usize, end: f64, n: f64, a: f64, q: f64) -> f64 {
    let r0 = g.grid()[i];
    let l = (end / r0).ln();
    if g.log_slopes().is_none() {
        let u0 = g.values()[i];
        let slope = (g.values()[i + 1] / u0).ln() / (g.grid()[i + 1] / r0).ln();
        return r0.powf(n + a) * u0.powf(q) * exp_integral(n + a + q * slope, l);
    }
    let x0 = r0.ln();
    crate::quadrature::kronrod_panel(|x| ((n + a) * x + q * g.log_value_in(i, x)).exp(), x0, x0 + l)
}

fn grid_mass(g: &RadialProfile, tab: &MassTable, radius: f64, n: f64, a: f64, q: f64) -> Result<f64> {
    if !tab.below.is_finite() {
        return Err(Error::DivergentIntegral(Side::Origin));
    }
    let grid = g.grid();
    let vals = g.values();
    let last = grid.len() - 1;
    if radius <= grid[0] {
        let e0 = n - 1.0 + a - q * g.inner_exponent();
        return Ok(radius.powf(n + a) * g.value(radius).powf(q) / (e0 + 1.0));
    }
    if radius >= grid[last] {
        let l = (radius / grid[last]).ln();
        let k = n + a - q * g.tail_exponent();
        return Ok(tab.cumulative[last] + grid[last].powf(n + a) * vals[last].powf(q) * exp_integral(k, l));
    }
    let i = grid.partition_point(|&x| x <= radius).clamp(1, last) - 1;
    Ok(tab.cumulative[i] + segment_mass(g, i, radius, n, a, q))
}

/// `∫_{B_t(x)} g(|y|) dy` with `|x| = d`.
pub fn ball_integral_radial(
    density: &SourceDensity<'_>,
    d: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(t > 0.0) || !(d >= 0.0) || !t.is_finite() || !d.is_finite() {
        return Err(Error::Domain(format!("ball integral needs t > 0, d >= 0 (got t={t}, d={d})")));
    }
    let inner_cfg = cfg.nested(0.1);
    let support = density.profile.support();
    // shells entirely inside the ball
    let full = density.mass((t - d).max(0.0).min(support), &inner_cfg)?;
    let lower = (t - d).abs();
    let upper = (t + d).min(support);
    if d == 0.0 || !(upper > lower) {
        return Ok(Integral {
            value: full,
            error: full * inner_cfg.rel_tol,
            panels: 0,
        });
    }
    let n = density.n;
    let n1 = n as i32 - 1;
    let h = |r: f64| density.value(r) * r.powi(n1) * cut_shell_fraction(r - lower, d, t, n);
    let mut pts = vec![lower.max(d * 1e-14)];
    let bp = &density.window.breakpoints;
    let start = bp.partition_point(|&x| x <= pts[0]);
    let end = bp.partition_point(|&x| x < upper);
    if start < end {
        pts.extend_from_slice(&bp[start..end]);
    }
    pts.push(upper);
    // the cut shells only need to be accurate relative to the whole ball
    let shell_cfg = QuadratureConfig {
        abs_tol: inner_cfg.abs_tol.max(inner_cfg.rel_tol * full / density.area),
        ..inner_cfg
    };
    let mut partial = if upper < 2.0 * lower {
        // thin shell: integrate in the offset from the inner edge
        let k = |sigma: f64| {
            let r = lower + sigma;
            density.value(r) * r.powi(n1) * cut_shell_fraction(sigma, d, t, n)
        };
        let offsets: Vec<f64> = pts.iter().map(|&r| r - lower).collect();
        integrate(k, &offsets, &shell_cfg)?
    } else {
        integrate_log(h, &pts, &shell_cfg)?
    };
    if lower < pts[0] {
        // t == d: the small shells near the origin are half inside
        let (origin, _) = density.shell_exponents();
        if let Some(e) = origin {
            if diverges_at_origin(e) {
                return Err(Error::DivergentIntegral(Side::Origin));
            }
            partial.value += h(pts[0]) * pts[0] / (e + 1.0);
        }
    }
    Ok(Integral {
        value: full + density.area * partial.value,
        error: full * inner_cfg.rel_tol + density.area * partial.error,
        panels: partial.panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::with_rel_tol(1e-10)
    }

    #[test]
    fn sphere_constants() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(5), 8.0 * PI * PI / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn cap_examples() {
        assert_relative_eq!(cap_measure(0.5, 0.0, 1.0, 3).unwrap(), PI, max_relative = 1e-14);
        assert_eq!(cap_measure(5.0, 1.0, 1.0, 3).unwrap(), 0.0);
        assert_relative_eq!(
            cap_measure(1.0, 2.0, 1.5, 3).unwrap(),
            2.0 * PI * (1.0 - 0.6875),
            max_relative = 1e-14
        );
        assert!(matches!(cap_measure(-1.0, 1.0, 1.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn cap_fraction_matches_angular_integral() {
        // fraction = ∫_0^θ* sin^{n-2} / ∫_0^π sin^{n-2}
        let cfg = cfg();
        let sin_power = |n: u32, hi: f64| integrate(|x: f64| x.sin().powi(n as i32 - 2), &[0.0, hi], &cfg).unwrap().value;
        for n in [3, 4, 7] {
            for (d, t) in [(1.0f64, 0.4f64), (1.0, 2.5), (2.0, 2.0), (0.3, 0.31)] {
                let (lower, upper) = ((t - d).abs(), t + d);
                for i in 1..10 {
                    let rho = lower + (upper - lower) * i as f64 / 10.0;
                    let cos = (d * d + rho * rho - t * t) / (2.0 * d * rho);
                    let expect = sin_power(n, cos.acos()) / sin_power(n, PI);
                    assert_relative_eq!(cap_fraction(rho, d, t, n), expect, max_relative = 1e-10);
                }
            }
        }
        // t = d: shells much smaller than d are cut in half
        assert_relative_eq!(cap_fraction(1e-20, 1.0, 1.0, 3), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn small_and_huge_balls_keep_relative_precision() {
        // 1/|y| is harmonic off the origin: its mean over B_t(x) is 1/|x| when t < |x|,
        // and Newton's theorem gives 2π t^2 - (2π/3) d^2 for t > |x|
        let u: Profile = PowerLawProfile::new(1.0, 1.0).unwrap().into();
        let dens = SourceDensity::new(&u, 0.0, 1.0, 3).unwrap();
        let cfg = QuadratureConfig::with_rel_tol(1e-12);
        for (d, t) in [(1.0, 1e-6), (3.0, 1e-4), (1e3, 0.5)] {
            let got = ball_integral_radial(&dens, d, t, &cfg).unwrap().value;
            assert_relative_eq!(got, 4.0 / 3.0 * PI * t.powi(3) / d, max_relative = 1e-10);
        }
        for (d, t) in [(0.1, 1e8), (1.0, 1e3)] {
            let got = ball_integral_radial(&dens, d, t, &cfg).unwrap().value;
            assert_relative_eq!(got, 2.0 * PI * t * t - 2.0 * PI / 3.0 * d * d, max_relative = 1e-10);
        }
    }

    #[test]
    fn even_dimension_cap_matches_angle_formula() {
        // n = 4: fraction = (θ - sinθ cosθ)/π
        for (rho, d, t) in [(1.0, 2.0, 1.5), (0.7, 0.5, 0.9), (2.0, 1.0, 2.5)] {
            let c: f64 = (d * d + rho * rho - t * t) / (2.0 * d * rho);
            let th = c.acos();
            let expect = (th - th.sin() * th.cos()) / PI;
            assert_relative_eq!(cap_fraction(rho, d, t, 4), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn ball_volume_and_origin_centred_power() {
        let one = Profile::PowerLaw(PowerLawProfile::new(1.0, 0.0).unwrap());
        let g = SourceDensity::new(&one, 0.0, 1.0, 3).unwrap();
        for d in [0.0, 0.3, 1.0, 7.5] {
            let v = ball_integral_radial(&g, d, 2.0, &cfg()).unwrap().value;
            assert_relative_eq!(v, 4.0 / 3.0 * PI * 8.0, max_relative = 1e-9);
        }
        let w = SourceDensity::new(&one, -1.0, 1.0, 3).unwrap();
        let v = ball_integral_radial(&w, 0.0, 1.0, &cfg()).unwrap().value;
        assert_relative_eq!(v, 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn grid_masses_are_exact_for_power_laws() {
        let grid = log_grid(1e-3, 1e3, 10);
        let vals: Vec<f64> = grid.iter().map(|r| 0.5 * r.powf(-1.5)).collect();
        let prof = Profile::Grid(RadialProfile::new(grid, vals, 1.5, 1.5).unwrap());
        let exact = Profile::PowerLaw(PowerLawProfile::new(0.5, 1.5).unwrap());
        let dg = SourceDensity::new(&prof, -0.5, 1.2, 4).unwrap();
        let de = SourceDensity::new(&exact, -0.5, 1.2, 4).unwrap();
        for r in [1e-5, 2e-3, 0.7, 500.0, 1e6] {
            assert_relative_eq!(
                dg.mass(r, &cfg()).unwrap(),
                de.mass(r, &cfg()).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn grid_masses_follow_the_hermite_interpolant() {
        let bubble = Profile::Bubble(BubbleProfile::new(1.3, 0.8, 2.0, 0.5).unwrap());
        let grid = Profile::Grid(bubble.to_grid(1e-3, 1e3, 100).unwrap());
        let dg = SourceDensity::new(&grid, -0.3, 5.0, 3).unwrap();
        let db = SourceDensity::new(&bubble, -0.3, 5.0, 3).unwrap();
        for r in [0.1, 0.5, 3.7, 200.0] {
            assert_relative_eq!(dg.mass(r, &cfg()).unwrap(), db.mass(r, &cfg()).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn t_equal_d_is_handled() {
        let prof = Profile::PowerLaw(PowerLawProfile::new(1.0, 2.0).unwrap());
        let g = SourceDensity::new(&prof, 0.0, 1.0, 3).unwrap();
        let at = ball_integral_radial(&g, 1.0, 1.0, &cfg()).unwrap().value;
        let near = ball_integral_radial(&g, 1.0, 1.0 + 1e-9, &cfg()).unwrap().value;
        assert_relative_eq!(at, near, max_relative = 1e-7);
    }

    #[test]
    fn origin_divergence_is_reported() {
        let prof = Profile::PowerLaw(PowerLawProfile::new(1.0, 3.5).unwrap());
        let g = SourceDensity::new(&prof, 0.0, 1.0, 3).unwrap();
        assert!(matches!(
            ball_integral_radial(&g, 1.0, 2.0, &cfg()),
            Err(Error::DivergentIntegral(Side::Origin))
        ));
        // a ball away from the origin is fine
        assert!(ball_integral_radial(&g, 1.0, 0.5, &cfg()).is_ok());
    }

    #[test]
    fn small_balls_scale_like_volume_times_weight() {
        // ∫_{B_t(x)} |y|^w ≤ C t^n for t < d/2 with C independent of t
        let one = Profile::PowerLaw(PowerLawProfile::new(1.0, 0.0).unwrap());
        let g = SourceDensity::new(&one, -1.5, 1.0, 3).unwrap();
        let d = 2.0;
        let ratios: Vec<f64> = [1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.99]
            .iter()
            .map(|&t| ball_integral_radial(&g, d, t, &cfg()).unwrap().value / t.powi(3))
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 3.0, "{ratios:?}");
    }

    proptest! {
        #[test]
        fn slicing_recovers_ball_volume(n in 3u32..=5, d in 0.01f64..5.0, t in 0.01f64..5.0) {
            let one = Profile::PowerLaw(PowerLawProfile::new(1.0, 0.0).unwrap());
            let g = SourceDensity::new(&one, 0.0, 1.0, n).unwrap();
            let v = ball_integral_radial(&g, d, t, &QuadratureConfig::with_rel_tol(1e-12)).unwrap().value;
            let exact = unit_ball_volume(n) * t.powi(n as i32);
            prop_assert!((v / exact - 1.0).abs() < 1e-10, "n={n} d={d} t={t}: {v} vs {exact}");
        }

        #[test]
        fn three_dimensional_cap_is_closed_form(rho in 0.01f64..5.0, d in 0.01f64..5.0, t in 0.01f64..5.0) {
            let c = (d * d + rho * rho - t * t) / (2.0 * d * rho);
            let m = cap_measure(rho, d, t, 3).unwrap();
            let expect = if rho + d <= t { 4.0 * PI * rho * rho }
                else if c >= 1.0 { 0.0 }
                else { 2.0 * PI * rho * rho * (1.0 - c) };
            prop_assert!((m - expect).abs() <= 1e-12 * expect.max(1e-300) + 1e-15);
        }

        #[test]
        fn cap_is_monotone_in_t(n in 3u32..=6, rho in 0.01f64..3.0, d in 0.01f64..3.0,
                                t in 0.0f64..6.0, dt in 0.0f64..1.0) {
            let a = cap_measure(rho, d, t, n).unwrap();
            let b = cap_measure(rho, d, t + dt, n).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-13));
        }
    }
}
