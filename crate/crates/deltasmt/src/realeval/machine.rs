//! Emulation of function-oracle machines by adaptive dyadic interval
//! refinement over the term tree.
//!
//! `eval_machine(f, phi, p)` queries the name `phi` at increasing indices
//! `k`, evaluates `f` over the hull `[phi_k ± 2^-k]` and stops once the
//! output enclosure is narrow enough to report a `2^-p`-accurate midpoint.
//! The largest queried index is recorded; it realizes the effective local
//! modulus of continuity at `phi` and hence the radius of local
//! linearisations.

use std::cell::RefCell;

use thiserror::Error;

use crate::num::{ceil_log2, Dyadic, Rational};
use crate::realeval::functions::{cos_interval, exp_interval, log_interval, sin_interval};
use crate::realeval::interval::{DomainErr, DyadicInterval};
use crate::realeval::names::Name;
use crate::term::{Term, VarId};

/// Hard limit on oracle indices when no modulus-derived cap is supplied.
pub const DEFAULT_QUERY_CAP: u32 = 8192;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("domain violation persisted up to the query cap: {0}")]
    Domain(DomainErr),
    #[error("enclosure did not converge within the query cap {cap}")]
    PrecisionExhausted { cap: u32 },
}

/// Result of one machine run: a `2^-p`-accurate dyadic value and the largest
/// oracle index queried (0 when the evaluation needed no queries).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub value: Dyadic,
    pub max_query: u32,
}

/// Evaluates a term over intervals supplied per variable. Operations other
/// than division, roots and transcendentals are exact; those round outward at
/// the working precision `prec`.
pub fn eval_term_interval(
    term: &Term,
    env: &mut dyn FnMut(VarId) -> DyadicInterval,
    prec: i64,
) -> Result<DyadicInterval, DomainErr> {
    match term {
        Term::Const(q) => Ok(DyadicInterval::from_rational(q, prec)),
        Term::Var(v) => Ok(env(*v)),
        Term::Add(a, b) => Ok(eval_term_interval(a, env, prec)?
            .add(&eval_term_interval(b, env, prec)?)),
        Term::Neg(a) => Ok(eval_term_interval(a, env, prec)?.neg()),
        Term::Mul(a, b) => {
            let ia = eval_term_interval(a, env, prec)?;
            if ia.is_zero_point() {
                // 0 * t = 0 whenever t is defined, which the evaluation
                // contract presumes; skipping t keeps the product query-free.
                return Ok(DyadicInterval::zero());
            }
            let ib = eval_term_interval(b, env, prec)?;
            Ok(ia.mul(&ib))
        }
        Term::Div(a, b) => {
            let ia = eval_term_interval(a, env, prec)?;
            let ib = eval_term_interval(b, env, prec)?;
            ia.div(&ib, prec)
        }
        Term::Recip(a) => eval_term_interval(a, env, prec)?.recip(prec),
        Term::Pow(a, n) => eval_term_interval(a, env, prec)?.pow_int(*n, prec),
        Term::Sqrt(a) => eval_term_interval(a, env, prec)?.sqrt(prec),
        Term::Sin(a) => Ok(sin_interval(&eval_term_interval(a, env, prec)?, prec)),
        Term::Cos(a) => Ok(cos_interval(&eval_term_interval(a, env, prec)?, prec)),
        Term::Exp(a) => Ok(exp_interval(&eval_term_interval(a, env, prec)?, prec)),
        Term::Log(a) => log_interval(&eval_term_interval(a, env, prec)?, prec),
    }
}

/// Evaluates a term over a fixed box (one interval per variable in the order
/// of `vars`).
pub fn eval_term_box(
    term: &Term,
    vars: &[VarId],
    box_: &[DyadicInterval],
    prec: i64,
) -> Result<DyadicInterval, DomainErr> {
    debug_assert_eq!(vars.len(), box_.len());
    let mut env = |v: VarId| {
        let i = vars.iter().position(|&u| u == v).expect("variable in box");
        box_[i].clone()
    };
    eval_term_interval(term, &mut env, prec)
}

/// Stopping width for precision `p`: slightly below `2 * 2^-p`, so the
/// midpoint is strictly more than `2^-(p+17)` better than the `2^-p`
/// contract. The slack lets evaluations at different precisions be compared
/// against each other without losing the contract.
fn stop_threshold(p: u32) -> Dyadic {
    // (2^17 - 1) * 2^(-p-16)
    Dyadic::new(num_bigint::BigInt::from((1i64 << 17) - 1), -(p as i64) - 16)
}

/// Runs the machine for `f` on the name `phi` at output precision `p`.
///
/// The query schedule starts at index 2 and advances by width-driven jumps;
/// it never exceeds `cap` (or a hard default), and failing to converge at the
/// cap is an evaluation failure. The schedule is deterministic and is part of
/// the contract: it fixes the radii of local linearisations.
pub fn eval_machine(
    f: &Term,
    phi: &Name,
    p: u32,
    cap: Option<u32>,
) -> Result<EvalResult, EvalError> {
    let vars: Vec<VarId> = f.vars().into_iter().collect();
    debug_assert_eq!(vars.len(), phi.dim());
    let threshold = stop_threshold(p);
    let hard_cap = cap.unwrap_or(DEFAULT_QUERY_CAP).max(2);
    let mut k: u32 = 2.min(hard_cap);
    let mut last_domain_err: Option<DomainErr> = None;
    loop {
        let w = k as i64 + 64;
        let queried = RefCell::new(false);
        let values: RefCell<Option<Vec<DyadicInterval>>> = RefCell::new(None);
        let radius = Dyadic::power_of_two(-(k as i64));
        let mut env = |v: VarId| {
            let mut cache = values.borrow_mut();
            if cache.is_none() {
                *queried.borrow_mut() = true;
                let q = phi.query(k);
                *cache = Some(
                    q.iter()
                        .map(|qi| DyadicInterval::from_center_radius(qi, &radius, w))
                        .collect(),
                );
            }
            let i = vars.iter().position(|&u| u == v).expect("term variable");
            cache.as_ref().unwrap()[i].clone()
        };
        let outcome = eval_term_interval(f, &mut env, w);
        let did_query = *queried.borrow();
        let next = match outcome {
            Ok(iv) => {
                if iv.width() <= threshold {
                    let value = iv.midpoint().round_to_grid(p as i64 + 18);
                    return Ok(EvalResult {
                        value,
                        max_query: if did_query { k } else { 0 },
                    });
                }
                // width-driven jump: lands near the smallest index whose
                // linear width model meets the threshold
                let ratio = iv.width().to_rational() / threshold.to_rational();
                let jump = ceil_log2(&ratio).max(1);
                k.saturating_add(jump.min(u32::MAX as i64) as u32)
            }
            Err(e) => {
                last_domain_err = Some(e);
                k.saturating_mul(2)
            }
        };
        if k >= hard_cap {
            return Err(match last_domain_err {
                Some(e) => EvalError::Domain(e),
                None => EvalError::PrecisionExhausted { cap: hard_cap },
            });
        }
        k = next.min(hard_cap);
    }
}

/// Accuracy `2^-p` implied by the machine contract, as a rational bound.
pub fn accuracy_bound(p: u32) -> Rational {
    crate::num::pow2(-(p as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::num::{pow2, rat};
    use crate::realeval::functions::exp_point;
    use crate::term::VarId;

    fn x() -> VarId {
        VarId(0)
    }

    #[test]
    fn identity_name_accuracy() {
        let f = Term::var(x());
        let phi = Name::constant(vec![rat(1, 3)]);
        let r = eval_machine(&f, &phi, 10, None).unwrap();
        assert!((r.value.to_rational() - rat(1, 3)).abs() <= pow2(-10));
        assert!(r.max_query >= 10);
    }

    #[test]
    fn sin_at_zero() {
        let f = Term::sin(Term::var(x()));
        let phi = Name::constant(vec![rat(0, 1)]);
        let r = eval_machine(&f, &phi, 10, None).unwrap();
        assert!(r.value.to_rational().abs() <= pow2(-10));
    }

    #[test]
    fn exp_at_one_matches_reference() {
        let f = Term::exp(Term::var(x()));
        let phi = Name::constant(vec![rat(1, 1)]);
        let r = eval_machine(&f, &phi, 5, None).unwrap();
        let e = exp_point(&Dyadic::one(), 60).midpoint().to_rational();
        assert!((r.value.to_rational() - &e).abs() <= pow2(-5));
        // compare against higher-precision run as reference
        let hi = eval_machine(&f, &phi, 40, None).unwrap();
        assert!((r.value.to_rational() - hi.value.to_rational()).abs() <= pow2(-5));
    }

    #[test]
    fn constant_term_needs_no_queries() {
        // (-5) + 0*x evaluates without consulting the oracle
        let f = Term::add(
            Term::constant(rat(-5, 1)),
            Term::mul(Term::constant(rat(0, 1)), Term::var(x())),
        );
        let phi = Name::constant(vec![rat(7, 2)]);
        let r = eval_machine(&f, &phi, 8, None).unwrap();
        assert_eq!(r.max_query, 0);
        assert_eq!(r.value.to_rational(), rat(-5, 1));
    }

    #[test]
    fn domain_error_persists() {
        // 1/x at a name of 0
        let f = Term::recip(Term::var(x()));
        let phi = Name::constant(vec![rat(0, 1)]);
        let err = eval_machine(&f, &phi, 5, Some(64)).unwrap_err();
        assert!(matches!(err, EvalError::Domain(_)));
    }

    #[test]
    fn query_monotone_in_precision() {
        let f = Term::sin(Term::var(x()));
        let phi = Name::constant(vec![rat(22, 7)]);
        let mut last = 0;
        for p in [4u32, 8, 12, 20, 30, 44] {
            let r = eval_machine(&f, &phi, p, None).unwrap();
            assert!(r.max_query >= last, "max_query not monotone at p={p}");
            last = r.max_query;
        }
    }
}
