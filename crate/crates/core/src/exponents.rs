//! Exponent bootstrap iterations.
//!
//! Both iterations run the affine recurrence
//! `x_j = (q/(p-1)) x_{j-1} - (p*beta + a)/(p-1)`, whose fixed point is the
//! slow rate `(p*beta+a)/(q-p+1)`. The nonexistence iteration starts from
//! `a_0 = (n - beta p)/(p-1)` and stops at the first `a_j <= 0`; the slow
//! bootstrap starts from a caller-chosen `b_0` and stops at the first
//! `b_j < 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;

pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Terms beyond this magnitude are not stored; the sequence has diverged.
const OVERFLOW_GUARD: f64 = 1e300;

/// Number of steps recorded for a sequence started at its fixed point.
const FIXED_POINT_TRACE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    NonexistenceA,
    SlowBootstrapB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum Verdict {
    /// The first index whose term crossed the stopping threshold.
    HitNonpositive { j0: usize },
    ConvergesTo { limit: f64 },
    Diverges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExponentSequence {
    pub kind: SequenceKind,
    pub start: f64,
    pub terms: Vec<f64>,
    pub verdict: Verdict,
    /// `q / (p - 1)`.
    pub ratio: f64,
    /// Stopping index predicted by the closed form before iterating.
    pub predicted_j0: Option<usize>,
}

impl ExponentSequence {
    /// One row per term: `kind,j,term`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,j,term\n");
        for (j, t) in self.terms.iter().enumerate() {
            let _ = writeln!(out, "{:?},{},{}", self.kind, j, t);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Recurrence {
    ratio: f64,
    step: f64,
}

impl Recurrence {
    fn of(params: &ProblemParams) -> Self {
        let pm1 = params.p() - 1.0;
        Recurrence {
            ratio: params.q() / pm1,
            step: (params.beta() * params.p() + params.a()) / pm1,
        }
    }

    fn next(&self, x: f64) -> f64 {
        self.ratio * x - self.step
    }

    fn fixed_point(&self) -> f64 {
        self.step / (self.ratio - 1.0)
    }

    fn term(&self, j: usize, start: f64) -> f64 {
        if self.ratio == 1.0 {
            return start - j as f64 * self.step;
        }
        let rj = self.ratio.powi(j as i32);
        // (q/(p-1))^j * x0 - (1 + r + ... + r^{j-1}) * step
        rj * start - (rj - 1.0) / (self.ratio - 1.0) * self.step
    }

    /// Smallest `j` with `term(j)` at or below zero (`strict`: below zero),
    /// or `None` when the closed form never gets there.
    fn predict_stop(&self, start: f64, strict: bool) -> Option<usize> {
        let stops = |x: f64| if strict { x < 0.0 } else { x <= 0.0 };
        if stops(start) {
            return Some(0);
        }
        let r = self.ratio;
        let estimate = if r == 1.0 {
            if self.step <= 0.0 {
                return None;
            }
            start / self.step
        } else {
            let fp = self.fixed_point();
            let gap = start - fp;
            if r > 1.0 {
                // r^j (x0 - L) + L: reaches zero only when x0 < L, L > 0
                if gap >= 0.0 || fp <= 0.0 {
                    return None;
                }
                (fp / (fp - start)).ln() / r.ln()
            } else {
                // geometric decay toward L; needs L < 0 to cross
                if fp >= 0.0 {
                    return None;
                }
                (-fp / gap).ln() / r.ln()
            }
        };
        if !estimate.is_finite() || estimate > u32::MAX as f64 {
            return None;
        }
        // settle rounding of the logarithm against the closed form
        let mut j = estimate.floor().max(1.0) as usize;
        while j > 1 && stops(self.term(j - 1, start)) {
            j -= 1;
        }
        while !stops(self.term(j, start)) {
            j += 1;
            if j as f64 > estimate + 8.0 {
                return None;
            }
        }
        Some(j)
    }
}

/// `j`-th term of the recurrence from `start`, by the geometric-sum closed
/// form; the arithmetic-progression branch covers `q = p - 1`.
pub fn closed_form_term(j: usize, start: f64, params: &ProblemParams) -> f64 {
    Recurrence::of(params).term(j, start)
}

fn run(
    kind: SequenceKind,
    start: f64,
    params: &ProblemParams,
    max_iter: usize,
    strict: bool,
) -> Result<ExponentSequence> {
    if max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    let rec = Recurrence::of(params);
    let predicted_j0 = rec.predict_stop(start, strict);
    let stops = |x: f64| if strict { x < 0.0 } else { x <= 0.0 };
    let fixed = if rec.ratio == 1.0 { f64::NAN } else { rec.fixed_point() };

    let mut seq = ExponentSequence {
        kind,
        start,
        terms: vec![start],
        verdict: Verdict::Diverges,
        ratio: rec.ratio,
        predicted_j0,
    };

    if stops(start) {
        seq.verdict = Verdict::HitNonpositive { j0: 0 };
        return Ok(seq);
    }

    // The fixed point is repelling for ratio > 1; iterating it in floating
    // point would drift away, so a start on it is reported as constant.
    if rec.ratio > 1.0 && (start - fixed).abs() <= 1e-12 * fixed.abs().max(1.0) {
        seq.terms = vec![start; FIXED_POINT_TRACE.min(max_iter) + 1];
        seq.verdict = Verdict::ConvergesTo { limit: fixed };
        return Ok(seq);
    }

    let mut x = start;
    for j in 1..=max_iter {
        x = rec.next(x);
        if stops(x) {
            seq.terms.push(x);
            seq.verdict = Verdict::HitNonpositive { j0: j };
            return Ok(seq);
        }
        if !x.is_finite() || x.abs() > OVERFLOW_GUARD {
            break;
        }
        seq.terms.push(x);
    }

    // No stop within budget: settle the verdict from the ratio.
    seq.verdict = if rec.ratio < 1.0 {
        Verdict::ConvergesTo { limit: fixed }
    } else if rec.ratio > 1.0 && start > fixed {
        Verdict::Diverges
    } else {
        return Err(Error::IterationBudgetExceeded(max_iter));
    };
    Ok(seq)
}

/// Iterates `a_j` from `a_0 = (n - beta p)/(p - 1)` until some `a_j <= 0`.
///
/// Accepts tuples built with [`ProblemParams::for_iteration`], i.e. any
/// `q > 0`.
pub fn nonexistence_sequence(params: &ProblemParams, max_iter: usize) -> Result<ExponentSequence> {
    let a0 = (params.nf() - params.beta() * params.p()) / (params.p() - 1.0);
    run(SequenceKind::NonexistenceA, a0, params, max_iter, false)
}

/// Iterates `b_j` from `b0` until some `b_j < 0`.
///
/// Starting below the slow rate always terminates; at the slow rate the
/// sequence is constant; above it the terms grow without bound.
pub fn slow_bootstrap(b0: f64, params: &ProblemParams, max_iter: usize) -> Result<ExponentSequence> {
    if !(b0 >= 0.0) {
        return Err(Error::Domain(format!("b0 must be nonnegative, got {b0}")));
    }
    let ex = params.exponents();
    if params.q() <= ex.q_liouville {
        return Err(Error::NotApplicable(format!(
            "slow bootstrap needs q > {} (got {})",
            ex.q_liouville,
            params.q()
        )));
    }
    run(SequenceKind::SlowBootstrapB, b0, params, max_iter, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::valid_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pde(q: f64) -> ProblemParams {
        ProblemParams::for_iteration(3, 2.0, q, 0.0, 1.0).unwrap()
    }

    #[test]
    fn nonexistence_examples() {
        let s = nonexistence_sequence(&pde(1.0), DEFAULT_MAX_ITER).unwrap();
        assert_eq!(s.terms, vec![1.0, -1.0]);
        assert_eq!(s.verdict, Verdict::HitNonpositive { j0: 1 });
        assert_eq!(s.predicted_j0, Some(1));

        let s = nonexistence_sequence(&pde(2.0), DEFAULT_MAX_ITER).unwrap();
        assert_eq!(s.terms, vec![1.0, 0.0]);
        assert_eq!(s.verdict, Verdict::HitNonpositive { j0: 1 });

        let s = nonexistence_sequence(&pde(4.0), DEFAULT_MAX_ITER).unwrap();
        assert_eq!(s.verdict, Verdict::Diverges);
        assert!(s.terms.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(s.predicted_j0, None);
    }

    #[test]
    fn closed_form_examples() {
        let p4 = pde(4.0);
        assert_eq!(closed_form_term(0, 0.37, &p4), 0.37);
        assert_relative_eq!(closed_form_term(2, 0.5, &p4), -2.0, max_relative = 1e-14);
        assert_relative_eq!(closed_form_term(3, 1.0, &pde(2.0)), -6.0, max_relative = 1e-14);
        // q = p - 1: arithmetic progression
        let p1 = pde(1.0);
        assert_eq!(closed_form_term(3, 1.0, &p1), 1.0 - 3.0 * 2.0);
    }

    #[test]
    fn slow_bootstrap_examples() {
        let p4 = ProblemParams::pde(3, 2.0, 4.0, 0.0).unwrap();
        let slow = p4.exponents().slow_rate;

        let s = slow_bootstrap(slow, &p4, 100).unwrap();
        assert!(s.terms.iter().all(|&t| t == slow));
        assert_eq!(s.verdict, Verdict::ConvergesTo { limit: slow });

        let s = slow_bootstrap(0.5, &p4, 100).unwrap();
        assert_eq!(s.terms, vec![0.5, 0.0, -2.0]);
        assert_eq!(s.verdict, Verdict::HitNonpositive { j0: 2 });
        assert_eq!(s.predicted_j0, Some(2));

        let s = slow_bootstrap(1.0, &p4, 100).unwrap();
        assert_eq!(&s.terms[..3], &[1.0, 2.0, 6.0]);
        assert_eq!(s.verdict, Verdict::Diverges);
    }

    #[test]
    fn slow_bootstrap_rejects_liouville_range() {
        let p = ProblemParams::pde(3, 2.0, 2.5, 0.0).unwrap();
        assert!(matches!(slow_bootstrap(0.1, &p, 10), Err(Error::NotApplicable(_))));
        let p = ProblemParams::pde(3, 2.0, 4.0, 0.0).unwrap();
        assert!(matches!(slow_bootstrap(-0.1, &p, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        // ratio = 1, step 2, a0 = 1e6 needs 5e5 steps
        let p = ProblemParams::for_iteration(3, 2.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            run(SequenceKind::NonexistenceA, 1e6, &p, 10, false),
            Err(Error::IterationBudgetExceeded(10))
        ));
    }

    #[test]
    fn sub_unit_ratio_converges_or_stops() {
        // q/(p-1) = 0.5: limit (beta p + a)/(q-p+1) = 2/(-0.5) = -4
        let p = ProblemParams::for_iteration(3, 2.0, 0.5, 0.0, 1.0).unwrap();
        let s = nonexistence_sequence(&p, 1000).unwrap();
        assert_eq!(s.verdict, Verdict::HitNonpositive { j0: 1 });
        let s = run(SequenceKind::NonexistenceA, 1e9, &p, 3, false).unwrap();
        assert_eq!(s.verdict, Verdict::ConvergesTo { limit: -4.0 });
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = nonexistence_sequence(&pde(1.0), 10).unwrap();
        assert_eq!(s.to_csv(), "kind,j,term\nNonexistenceA,0,1\nNonexistenceA,1,-1\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn slow_rate_is_the_fixed_point(pp in valid_params()) {
            let rec = Recurrence::of(&pp);
            let slow = pp.exponents().slow_rate;
            let resid = (pp.q() * slow - pp.p() * pp.beta() - pp.a()) / (pp.p() - 1.0) - slow;
            prop_assert!(resid.abs() < 1e-13 * slow.max(1.0));
            prop_assert!((rec.next(slow) - slow).abs() < 1e-13 * slow.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_recurrence(pp in valid_params(), start in 0.0f64..5.0) {
            let rec = Recurrence::of(&pp);
            let mut x = start;
            for j in 0..=40usize {
                let cf = closed_form_term(j, start, &pp);
                // the recurrence amplifies rounding by ratio^j, like the
                // closed form itself; compare relative to the largest scale seen
                let scale = 1f64.max(x.abs()).max(rec.ratio.powi(j as i32) * start.abs());
                prop_assert!((cf - x).abs() <= 1e-9 * scale, "j={} cf={} it={}", j, cf, x);
                x = rec.next(x);
            }
        }

        #[test]
        fn nonexistence_decreases_below_liouville(pp in valid_params(), frac in 0.01f64..0.999) {
            let ql = pp.exponents().q_liouville;
            let p = ProblemParams::for_iteration(pp.n(), pp.p(), frac * ql, pp.a(), pp.beta()).unwrap();
            let s = nonexistence_sequence(&p, DEFAULT_MAX_ITER).unwrap();
            prop_assert!(s.terms.windows(2).all(|w| w[1] < w[0]));
            match s.verdict {
                Verdict::HitNonpositive { j0 } => prop_assert_eq!(Some(j0), s.predicted_j0),
                v => prop_assert!(false, "unexpected verdict {:?}", v),
            }
        }

        #[test]
        fn slow_bootstrap_below_fixed_point_stops(pp in valid_params(), frac in 0.0f64..0.999) {
            prop_assume!(pp.q() > pp.exponents().q_liouville);
            let slow = pp.exponents().slow_rate;
            let s = slow_bootstrap(frac * slow, &pp, DEFAULT_MAX_ITER).unwrap();
            match s.verdict {
                Verdict::HitNonpositive { j0 } => prop_assert_eq!(Some(j0), s.predicted_j0),
                v => prop_assert!(false, "unexpected verdict {:?}", v),
            }
        }
    }
}
