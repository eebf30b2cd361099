//! Weighted norms and energies of radial profiles, with the Pohozaev,
//! scaling and Hardy–Sobolev checks built on them.
//!
//! Every improper integral is split at the profile's quadrature window and
//! closed with the exact power laws outside it. Divergence is decided by
//! exponent arithmetic before any quadrature runs; a logarithmic divergence
//! counts as divergent.

use serde::Serialize;

use crate::error::{Error, Result, Side};
use crate::params::{near, ProblemParams};
use crate::quadrature::QuadratureConfig;
use crate::radgeom::{diverges_at_tail, sphere_area, Asymptote, ClosedIntegrand, Profile};
use crate::shoot::pde_residual;

/// `ω_{n-1} ∫_0^∞ r^{n-1+weight} U(r)^power dr`.
pub fn radial_moment(u: &Profile, power: f64, weight: f64, n: u32, quad: &QuadratureConfig) -> Result<f64> {
    let shift = n as f64 - 1.0 + weight;
    let exp = |a: Asymptote| match a {
        Asymptote::Power(e) => Some(shift + power * e),
        Asymptote::Vanishes => None,
    };
    let (o, t) = u.value_asymptotes();
    let window = u.window();
    let integrand = ClosedIntegrand {
        h: |r: f64| {
            let v = u.value(r);
            if v <= 0.0 {
                0.0
            } else {
                r.powf(shift) * v.powf(power)
            }
        },
        origin: exp(o),
        tail: exp(t),
        window: &window,
    };
    Ok(sphere_area(n) * integrand.integral(0.0, f64::INFINITY, quad)?.value)
}

/// `‖u‖_s^s = ∫_{R^n} u^s`.
pub fn norm_power(u: &Profile, s: f64, n: u32, quad: &QuadratureConfig) -> Result<f64> {
    radial_moment(u, s, 0.0, n, quad)
}

/// `‖∇u‖_p^p = ω_{n-1} ∫_0^∞ |U'(r)|^p r^{n-1} dr`.
pub fn gradient_energy(u: &Profile, p: f64, n: u32, quad: &QuadratureConfig) -> Result<f64> {
    let shift = n as f64 - 1.0;
    let exp = |a: Asymptote| match a {
        Asymptote::Power(e) => Some(shift + p * e),
        Asymptote::Vanishes => None,
    };
    let (o, t) = u.derivative_asymptotes();
    let window = u.window();
    let integrand = ClosedIntegrand {
        h: |r: f64| u.abs_derivative(r).powf(p) * r.powf(shift),
        origin: exp(o),
        tail: exp(t),
        window: &window,
    };
    Ok(sphere_area(n) * integrand.integral(0.0, f64::INFINITY, quad)?.value)
}

/// `∫_{R^n} |x|^a u^{q+1}`.
pub fn source_energy(u: &Profile, params: &ProblemParams, quad: &QuadratureConfig) -> Result<f64> {
    radial_moment(u, params.q() + 1.0, params.a(), params.n(), quad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Integrability {
    Finite,
    DivergesAtTail,
    DivergesAtOrigin,
}

/// Whether `u ∈ L^s(R^n)`, decided from the declared exponents. A tail
/// divergence is reported first when both ends fail.
pub fn tail_integrability(u: &Profile, s: f64, n: u32) -> Integrability {
    let shift = n as f64 - 1.0;
    let (o, t) = u.value_asymptotes();
    if let Asymptote::Power(e) = t {
        if diverges_at_tail(shift + s * e) {
            return Integrability::DivergesAtTail;
        }
    }
    if let Asymptote::Power(e) = o {
        if crate::radgeom::diverges_at_origin(shift + s * e) {
            return Integrability::DivergesAtOrigin;
        }
    }
    Integrability::Finite
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PohozaevCheck {
    /// `‖∇u‖_p^p`
    pub lhs: f64,
    /// `∫ |x|^a u^{q+1}`
    pub rhs: f64,
    /// `1 - n/p`
    pub gradient_coefficient: f64,
    /// `(n+a)/(q+1)`
    pub source_coefficient: f64,
    /// `|c_G G + c_S S| / (|c_G G| + |c_S S|)`
    pub balance_residual: f64,
}

/// Both energies and the relative residual of
/// `(1 - n/p)‖∇u‖_p^p + ((n+a)/(q+1)) ∫|x|^a u^{q+1} = 0`.
pub fn pohozaev_check(u: &Profile, params: &ProblemParams, quad: &QuadratureConfig) -> Result<PohozaevCheck> {
    let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
    let lhs = gradient_energy(u, p, params.n(), quad)?;
    let rhs = source_energy(u, params, quad)?;
    let cg = 1.0 - n / p;
    let cs = (n + a) / (q + 1.0);
    let scale = (cg * lhs).abs() + (cs * rhs).abs();
    Ok(PohozaevCheck {
        lhs,
        rhs,
        gradient_coefficient: cg,
        source_coefficient: cs,
        balance_residual: if scale > 0.0 { (cg * lhs + cs * rhs).abs() / scale } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormScaling {
    pub eta: f64,
    /// `‖u_λ‖_η / ‖u‖_η`
    pub ratio: f64,
    /// `‖u_λ‖_η^η / ‖u‖_η^η`
    pub power_ratio: f64,
    /// `λ^{ηθ - n}`
    pub predicted_power_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingReport {
    pub lambda: f64,
    pub theta: f64,
    pub norms: Vec<NormScaling>,
    /// Largest `|pde_residual|` of `u_λ` at the sample radii, when `θ` is
    /// the slow rate and the equation is the PDE.
    pub max_residual: Option<f64>,
    pub residual_radii: Vec<f64>,
}

/// Compares `‖u_λ‖_η` with `‖u‖_η` for `u_λ(x) = λ^θ u(λx)`.
pub fn scaling_check(
    u: &Profile,
    params: &ProblemParams,
    lambda: f64,
    theta: f64,
    etas: &[f64],
    quad: &QuadratureConfig,
) -> Result<ScalingReport> {
    if !(lambda > 0.0) || !lambda.is_finite() || !theta.is_finite() {
        return Err(Error::Domain(format!("scaling needs lambda > 0 and finite theta (got {lambda}, {theta})")));
    }
    let scaled = u.scaled(lambda, theta);
    let n = params.n();
    let mut norms = Vec::with_capacity(etas.len());
    for &eta in etas {
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("norm exponent must be positive (got {eta})")));
        }
        let base = norm_power(u, eta, n, quad)?;
        let moved = norm_power(&scaled, eta, n, quad)?;
        let power_ratio = moved / base;
        norms.push(NormScaling {
            eta,
            ratio: power_ratio.powf(1.0 / eta),
            power_ratio,
            predicted_power_ratio: lambda.powf(eta * theta - params.nf()),
        });
    }
    let slow = params.exponents().slow_rate;
    let mut residual_radii = Vec::new();
    let mut max_residual = None;
    if params.is_pde_mode() && near(theta, slow, 1e-12) {
        let mut worst: f64 = 0.0;
        for r in [0.1, 1.0, 10.0] {
            match pde_residual(&scaled, params, r) {
                Ok(res) => {
                    worst = worst.max(res.abs());
                    residual_radii.push(r);
                }
                Err(Error::DerivativeUnavailable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if !residual_radii.is_empty() {
            max_residual = Some(worst);
        }
    }
    Ok(ScalingReport {
        lambda,
        theta,
        norms,
        max_residual,
        residual_radii,
    })
}

/// `‖∇u‖_p / (∫ |u|^{q+1} |x|^a)^{1/(q+1)}` at `q + 1 = p(n+a)/(n-p)`.
pub fn hs_quotient(u: &Profile, params: &ProblemParams, quad: &QuadratureConfig) -> Result<f64> {
    let (n, p, q, a) = (params.nf(), params.p(), params.q(), params.a());
    let critical = p * (n + a) / (n - p) - 1.0;
    if !near(q, critical, 1e-10) {
        return Err(Error::NotCritical { q, critical });
    }
    let g = gradient_energy(u, p, params.n(), quad)?;
    let s = source_energy(u, params, quad)?;
    Ok(g.powf(1.0 / p) / s.powf(1.0 / (q + 1.0)))
}

/// A norm or energy that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Quantity {
    pub value: Option<f64>,
    pub finite: bool,
    pub diverges_at: Option<Side>,
}

impl Quantity {
    fn from_result(r: Result<f64>) -> Result<Self> {
        match r {
            Ok(v) => Ok(Quantity {
                value: Some(v),
                finite: true,
                diverges_at: None,
            }),
            Err(Error::DivergentIntegral(side)) => Ok(Quantity {
                value: None,
                finite: false,
                diverges_at: Some(side),
            }),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyReport {
    pub gradient_energy: Quantity,
    pub source_energy: Quantity,
    /// `(s, ‖u‖_s^s)` pairs.
    pub ls_norms: Vec<(f64, Quantity)>,
    pub pohozaev: Option<PohozaevCheck>,
    pub hs_quotient: Option<f64>,
}

impl EnergyReport {
    /// Rows `quantity,value,finite`.
    pub fn to_csv(&self) -> String {
        let mut rows = vec!["quantity,value,finite".to_string()];
        let mut push = |name: String, q: &Quantity| {
            rows.push(format!(
                "{name},{},{}",
                q.value.map(|v| v.to_string()).unwrap_or_default(),
                q.finite
            ));
        };
        push("gradientEnergy".into(), &self.gradient_energy);
        push("sourceEnergy".into(), &self.source_energy);
        for (s, q) in &self.ls_norms {
            push(format!("lsNorm[{s}]"), q);
        }
        if let Some(pc) = &self.pohozaev {
            rows.push(format!("pohozaevLeft,{},true", pc.lhs));
            rows.push(format!("pohozaevRight,{},true", pc.rhs));
            rows.push(format!("balanceResidual,{},true", pc.balance_residual));
        }
        if let Some(h) = self.hs_quotient {
            rows.push(format!("hsQuotient,{h},true"));
        }
        rows.join("\n") + "\n"
    }
}

/// Energies, `L^s` norms, and (when defined) the Pohozaev balance and
/// Hardy–Sobolev quotient of `u`.
pub fn energy_report(u: &Profile, params: &ProblemParams, etas: &[f64], quad: &QuadratureConfig) -> Result<EnergyReport> {
    let gradient = Quantity::from_result(gradient_energy(u, params.p(), params.n(), quad))?;
    let source = Quantity::from_result(source_energy(u, params, quad))?;
    let ls_norms = etas
        .iter()
        .map(|&s| Ok((s, Quantity::from_result(norm_power(u, s, params.n(), quad))?)))
        .collect::<Result<Vec<_>>>()?;
    let pohozaev = if gradient.finite && source.finite {
        Some(pohozaev_check(u, params, quad)?)
    } else {
        None
    };
    let hs = match hs_quotient(u, params, quad) {
        Ok(v) => Some(v),
        Err(Error::NotCritical { .. }) | Err(Error::DivergentIntegral(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EnergyReport {
        gradient_energy: gradient,
        source_energy: source,
        ls_norms,
        pohozaev,
        hs_quotient: hs,
    })
}
