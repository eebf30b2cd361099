//! Standing assumptions on `(n, p, q, a, beta)`, the exponents derived from
//! them, and the regime classification.
//!
//! Every quantity here is a closed-form function of the tuple; nothing looks
//! at a solution profile.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative band used to call `q` critical.
pub const CRITICAL_TOL: f64 = 1e-12;

/// One inequality of the standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Assumption {
    /// All five entries are finite numbers.
    Finite,
    /// `n` is an integer.
    IntegerDimension,
    /// `n >= 3`.
    DimensionAtLeastThree,
    /// `p > 1`.
    PAboveOne,
    /// `p <= 2`.
    PAtMostTwo,
    /// `q > p - 1`.
    QAbovePMinusOne,
    /// `q > 0` (relaxed form used by the exponent iterations).
    QPositive,
    /// `beta > 0`.
    BetaPositive,
    /// `-a >= 0`.
    WeightNonPositive,
    /// `-a < p*beta`.
    WeightBelowPBeta,
    /// `p*beta < n`.
    PBetaBelowDimension,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::Finite => "all parameters must be finite",
            Assumption::IntegerDimension => "n must be an integer",
            Assumption::DimensionAtLeastThree => "n >= 3 fails",
            Assumption::PAboveOne => "p > 1 fails",
            Assumption::PAtMostTwo => "p <= 2 fails",
            Assumption::QAbovePMinusOne => "q > p - 1 fails",
            Assumption::QPositive => "q > 0 fails",
            Assumption::BetaPositive => "beta > 0 fails",
            Assumption::WeightNonPositive => "-a >= 0 fails, a must be <= 0",
            Assumption::WeightBelowPBeta => "-a < p*beta fails",
            Assumption::PBetaBelowDimension => "p*beta < n fails",
        };
        f.write_str(s)
    }
}

/// Unvalidated parameter tuple as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub n: f64,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub beta: f64,
}

impl RawParams {
    pub fn new(n: f64, p: f64, q: f64, a: f64, beta: f64) -> Self {
        Self { n, p, q, a, beta }
    }
}

/// A tuple `(n, p, q, a, beta)` satisfying the standing assumptions
/// `n >= 3, 1 < p <= 2, q > p - 1, 0 <= -a < p*beta < n`.
///
/// Values built with [`ProblemParams::for_iteration`] relax `q > p - 1`
/// to `q > 0`; only the exponent iterations accept those.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    n: u32,
    p: f64,
    q: f64,
    a: f64,
    beta: f64,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64, q: f64, a: f64, beta: f64) -> Result<Self> {
        validate_params(RawParams::new(n as f64, p, q, a, beta))
    }

    /// PDE mode, `beta = 1`.
    pub fn pde(n: u32, p: f64, q: f64, a: f64) -> Result<Self> {
        Self::new(n, p, q, a, 1.0)
    }

    /// Same checks as [`ProblemParams::new`] except that `q > p - 1` is
    /// replaced by `q > 0`.
    pub fn for_iteration(n: u32, p: f64, q: f64, a: f64, beta: f64) -> Result<Self> {
        check(RawParams::new(n as f64, p, q, a, beta), false)
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn nf(&self) -> f64 {
        self.n as f64
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The same tuple with a different source exponent, fully revalidated.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.n, self.p, q, self.a, self.beta)
    }

    pub fn raw(&self) -> RawParams {
        RawParams::new(self.nf(), self.p, self.q, self.a, self.beta)
    }

    pub fn exponents(&self) -> DerivedExponents {
        derive_exponents(self)
    }

    pub(crate) fn is_pde_mode(&self) -> bool {
        self.beta == 1.0
    }
}

fn check(raw: RawParams, strict_q: bool) -> Result<ProblemParams> {
    let RawParams { n, p, q, a, beta } = raw;
    let mut bad = Vec::new();
    if ![n, p, q, a, beta].iter().all(|v| v.is_finite()) {
        return Err(Error::AssumptionViolation(vec![Assumption::Finite]));
    }
    if n.fract() != 0.0 || n > u32::MAX as f64 {
        bad.push(Assumption::IntegerDimension);
    }
    if n < 3.0 {
        bad.push(Assumption::DimensionAtLeastThree);
    }
    if p <= 1.0 {
        bad.push(Assumption::PAboveOne);
    }
    if p > 2.0 {
        bad.push(Assumption::PAtMostTwo);
    }
    if strict_q {
        if q <= p - 1.0 {
            bad.push(Assumption::QAbovePMinusOne);
        }
    } else if q <= 0.0 {
        bad.push(Assumption::QPositive);
    }
    if beta <= 0.0 {
        bad.push(Assumption::BetaPositive);
    }
    if a > 0.0 {
        bad.push(Assumption::WeightNonPositive);
    }
    if -a >= p * beta {
        bad.push(Assumption::WeightBelowPBeta);
    }
    if p * beta >= n {
        bad.push(Assumption::PBetaBelowDimension);
    }
    if bad.is_empty() {
        Ok(ProblemParams {
            n: n as u32,
            p,
            q,
            a,
            beta,
        })
    } else {
        Err(Error::AssumptionViolation(bad))
    }
}

/// Checks the standing assumptions, reporting every failed inequality.
pub fn validate_params(raw: RawParams) -> Result<ProblemParams> {
    check(raw, true)
}

/// Every exponent and threshold that follows from the tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DerivedExponents {
    /// Scale-invariant integrability index `n(q-p+1)/(p*beta+a)`.
    pub s0: f64,
    /// `n p / (n - p*beta)`.
    pub p_star: f64,
    /// `p(n+a)/(n-p*beta) - 1`.
    pub q_critical: f64,
    /// `(n+a)(p-1)/(n-p*beta)`; no positive solution at or below it.
    pub q_liouville: f64,
    /// `(n-p*beta)/(p-1)`.
    pub fast_rate: f64,
    /// `(p*beta+a)/(q-p+1)`.
    pub slow_rate: f64,
    /// `n(p-1)/(n-p*beta)`; lower end of the optimal integrability interval.
    pub integrability_floor: f64,
}

pub fn derive_exponents(params: &ProblemParams) -> DerivedExponents {
    let ProblemParams { p, q, a, beta, .. } = *params;
    let n = params.nf();
    let pb = p * beta;
    DerivedExponents {
        s0: n * (q - p + 1.0) / (pb + a),
        p_star: n * p / (n - pb),
        q_critical: p * (n + a) / (n - pb) - 1.0,
        q_liouville: (n + a) * (p - 1.0) / (n - pb),
        fast_rate: (n - pb) / (p - 1.0),
        slow_rate: (pb + a) / (q - p + 1.0),
        integrability_floor: n * (p - 1.0) / (n - pb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Nonexistence,
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegimeReport {
    pub regime: Regime,
    /// `n <= p^2`: no weak solution can live in `L^p`.
    pub lp_impossible: bool,
    pub exponents: DerivedExponents,
}

/// Whether `x` equals `target` within a relative band `tol`.
pub(crate) fn near(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol * target.abs().max(1.0)
}

pub fn classify_regime(params: &ProblemParams, tol: f64) -> RegimeReport {
    let ex = derive_exponents(params);
    let q = params.q;
    let regime = if q < ex.q_liouville || near(q, ex.q_liouville, tol) {
        Regime::Nonexistence
    } else if near(q, ex.q_critical, tol) {
        Regime::Critical
    } else if q < ex.q_critical {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    RegimeReport {
        regime,
        lp_impossible: params.nf() <= params.p * params.p,
        exponents: ex,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn violations(r: RawParams) -> Vec<Assumption> {
        match validate_params(r) {
            Err(Error::AssumptionViolation(v)) => v,
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn accepts_the_critical_triple() {
        let pp = validate_params(RawParams::new(3.0, 2.0, 5.0, 0.0, 1.0)).unwrap();
        assert_eq!(pp.n(), 3);
    }

    #[test]
    fn rejects_positive_weight() {
        let v = violations(RawParams::new(3.0, 2.0, 5.0, 0.5, 1.0));
        assert_eq!(v, vec![Assumption::WeightNonPositive]);
    }

    #[test]
    fn rejects_p_above_two() {
        let v = violations(RawParams::new(3.0, 2.5, 5.0, 0.0, 1.0));
        assert_eq!(v, vec![Assumption::PAtMostTwo]);
    }

    #[test]
    fn boundary_cases() {
        assert!(ProblemParams::new(3, 2.0, 5.0, 0.0, 1.0).is_ok());
        assert!(ProblemParams::new(3, 1.0, 5.0, 0.0, 1.0).is_err());
        // a = -p*beta is excluded
        let v = violations(RawParams::new(5.0, 2.0, 3.0, -2.0, 1.0));
        assert_eq!(v, vec![Assumption::WeightBelowPBeta]);
        let v = violations(RawParams::new(2.0, 2.0, 3.0, 0.0, 1.0));
        assert!(v.contains(&Assumption::DimensionAtLeastThree));
        assert!(v.contains(&Assumption::PBetaBelowDimension));
        let v = violations(RawParams::new(3.5, 2.0, 3.0, 0.0, 1.0));
        assert_eq!(v, vec![Assumption::IntegerDimension]);
        let v = violations(RawParams::new(3.0, 2.0, 1.0, 0.0, 1.0));
        assert_eq!(v, vec![Assumption::QAbovePMinusOne]);
        let v = violations(RawParams::new(3.0, 2.0, f64::NAN, 0.0, 1.0));
        assert_eq!(v, vec![Assumption::Finite]);
        assert!(ProblemParams::for_iteration(3, 2.0, 0.5, 0.0, 1.0).is_ok());
        assert!(ProblemParams::for_iteration(3, 2.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn exponents_at_critical_triple() {
        let ex = ProblemParams::pde(3, 2.0, 5.0, 0.0).unwrap().exponents();
        assert_eq!(ex.s0, 6.0);
        assert_eq!(ex.p_star, 6.0);
        assert_eq!(ex.q_critical, 5.0);
        assert_eq!(ex.q_liouville, 3.0);
        assert_eq!(ex.fast_rate, 1.0);
        assert_eq!(ex.slow_rate, 0.5);
        assert_eq!(ex.integrability_floor, 3.0);
    }

    #[test]
    fn exponents_subcritical_and_weighted() {
        let ex = ProblemParams::pde(3, 2.0, 4.0, 0.0).unwrap().exponents();
        assert_eq!(ex.s0, 4.5);
        assert_relative_eq!(ex.slow_rate, 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(ex.q_critical, 5.0);

        let ex = ProblemParams::pde(5, 2.0, 3.0, -1.0).unwrap().exponents();
        assert_eq!(ex.s0, 10.0);
        assert_relative_eq!(ex.q_critical, 5.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ex.q_liouville, 4.0 / 3.0, max_relative = 1e-15);
        assert_eq!(ex.fast_rate, 3.0);
        assert_eq!(ex.slow_rate, 0.5);
    }

    #[test]
    fn classification_examples() {
        let r = classify_regime(&ProblemParams::pde(3, 2.0, 2.0, 0.0).unwrap(), CRITICAL_TOL);
        assert_eq!(r.regime, Regime::Nonexistence);
        let r = classify_regime(&ProblemParams::pde(3, 2.0, 5.0, 0.0).unwrap(), CRITICAL_TOL);
        assert_eq!(r.regime, Regime::Critical);
        assert!(r.lp_impossible);
        let r = classify_regime(&ProblemParams::pde(5, 2.0, 3.0, -1.0).unwrap(), CRITICAL_TOL);
        assert_eq!(r.regime, Regime::Supercritical);
        assert!(!r.lp_impossible);
        let r = classify_regime(&ProblemParams::pde(3, 2.0, 4.0, 0.0).unwrap(), CRITICAL_TOL);
        assert_eq!(r.regime, Regime::Subcritical);
        // the Liouville threshold itself belongs to the nonexistence range
        let r = classify_regime(&ProblemParams::pde(3, 2.0, 3.0, 0.0).unwrap(), CRITICAL_TOL);
        assert_eq!(r.regime, Regime::Nonexistence);
    }

    #[test]
    fn report_json_keys_are_stable() {
        let r = classify_regime(&ProblemParams::pde(3, 2.0, 5.0, 0.0).unwrap(), CRITICAL_TOL);
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["regime"], "Critical");
        assert_eq!(v["lpImpossible"], true);
        for key in [
            "s0",
            "pStar",
            "qCritical",
            "qLiouville",
            "fastRate",
            "slowRate",
            "integrabilityFloor",
        ] {
            assert!(v["exponents"].get(key).is_some(), "missing {key}");
        }
    }

    pub(crate) fn valid_params() -> impl Strategy<Value = ProblemParams> {
        (3u32..12, 1.05f64..=2.0, 0.05f64..0.95, 0.0f64..0.95, 0.0f64..1.0)
            .prop_filter_map("assumptions", |(n, p, beta_frac, a_frac, q_frac)| {
                let nf = n as f64;
                let beta = beta_frac * nf / p;
                let a = -a_frac * p * beta;
                let q = (p - 1.0) + 0.01 + q_frac * 8.0;
                ProblemParams::new(n, p, q, a, beta).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn rate_order_matches_liouville_threshold(pp in valid_params()) {
            let ex = pp.exponents();
            let above = pp.q() > ex.q_liouville;
            // exact equality has measure zero in the sample
            prop_assert_eq!(ex.fast_rate > ex.slow_rate, above);
            if above {
                prop_assert!(ex.integrability_floor < ex.s0);
            }
        }

        #[test]
        fn s0_times_slow_rate_is_n(pp in valid_params()) {
            let ex = pp.exponents();
            let prod = ex.s0 * ex.slow_rate;
            prop_assert!((prod - pp.nf()).abs() <= 4.0 * f64::EPSILON * pp.nf());
        }

        #[test]
        fn critical_above_liouville(pp in valid_params()) {
            let ex = pp.exponents();
            prop_assert!(ex.q_critical > ex.q_liouville);
        }

        #[test]
        fn s0_equals_p_star_only_at_critical(pp in valid_params()) {
            let ex = pp.exponents();
            let at_crit = pp.with_q(ex.q_critical).unwrap().exponents();
            prop_assert!((at_crit.s0 - at_crit.p_star).abs() <= 1e-12 * at_crit.p_star);
            if (pp.q() - ex.q_critical).abs() > 1e-6 {
                prop_assert!((ex.s0 - ex.p_star).abs() > 1e-9);
            }
        }
    }
}
