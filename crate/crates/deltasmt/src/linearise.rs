//! Nonlinear conflict handling: delta-checks and box-exclusion clause
//! construction, in the full-box strategy (radius fixed by a uniform modulus
//! of continuity) and the local strategy (radius read off the evaluator's
//! maximum oracle query).

use crate::num::{pow2, Rational};
use crate::realeval::machine::{eval_machine, EvalError};
use crate::realeval::modulus::{p_of_delta, Modulus};
use crate::realeval::names::{xi_name_of, Name};
use crate::term::{Assignment, LinearAtom, LinearClause, NonlinConstraint, Rel, VarId};

/// Strategy used for a linearisation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LinMode {
    FullBox,
    Local,
}

impl LinMode {
    pub fn tag(&self) -> &'static str {
        match self {
            LinMode::FullBox => "full-box",
            LinMode::Local => "local",
        }
    }
}

/// Outcome of linearising one constraint at a total assignment.
#[derive(Clone, Debug)]
pub enum LinOutcome {
    /// the constraint is delta-satisfied at the assignment
    Satisfied,
    Clause {
        clause: LinearClause,
        eps: Rational,
        mode_used: LinMode,
    },
}

/// The clause `(x_1 <= c_1 - eps \/ x_1 >= c_1 + eps \/ ...)`: false exactly
/// on the open max-norm ball of radius `eps` around the center.
pub fn box_exclusion_clause(center: &[(VarId, Rational)], eps: &Rational) -> LinearClause {
    assert!(
        num_traits::Signed::is_positive(eps),
        "exclusion radius must be positive"
    );
    let mut atoms = Vec::with_capacity(2 * center.len());
    for (v, c) in center {
        // x <= c - eps  <=>  (c - eps) - x >= 0
        atoms.push(LinearAtom::new(
            c - eps,
            [(*v, crate::num::rat_int(-1))],
            Rel::Ge,
        ));
        // x >= c + eps  <=>  x - (c + eps) >= 0
        atoms.push(LinearAtom::new(
            -(c + eps),
            [(*v, crate::num::rat_int(1))],
            Rel::Ge,
        ));
    }
    LinearClause::new(atoms)
}

fn center_of(p: &NonlinConstraint, alpha: &Assignment) -> Vec<(VarId, Rational)> {
    p.vars()
        .iter()
        .map(|&v| {
            (
                v,
                alpha
                    .get(v)
                    .expect("linearisation requires a total assignment over the constraint")
                    .clone(),
            )
        })
        .collect()
}

/// Exact comparison `value ⋄ -delta/2` with the constraint's own relation.
fn delta_check(p: &NonlinConstraint, value: &Rational, delta: &Rational) -> bool {
    let bound = -(delta / crate::num::rat(2, 1));
    p.rel().holds_against(value, &bound)
}

/// Full-box linearisation: evaluates at a constant name of the assignment
/// point; on conflict the excluded radius is `2^-mu(p)` from the uniform
/// modulus, valid across the whole domain box.
pub fn linearise_fullbox(
    p_c: &NonlinConstraint,
    modulus: &Modulus,
    alpha: &Assignment,
    delta: &Rational,
) -> Result<LinOutcome, EvalError> {
    let p = p_of_delta(delta).expect("engine validates delta > 0");
    let center = center_of(p_c, alpha);
    let phi = Name::constant(center.iter().map(|(_, q)| q.clone()).collect());
    let result = eval_machine(p_c.term(), &phi, p, None)?;
    if delta_check(p_c, &result.value.to_rational(), delta) {
        return Ok(LinOutcome::Satisfied);
    }
    let eps = pow2(-(modulus.apply(p) as i64));
    Ok(LinOutcome::Clause {
        clause: box_exclusion_clause(&center, &eps),
        eps,
        mode_used: LinMode::FullBox,
    })
}

/// Local linearisation: evaluates at the grid name of the assignment point
/// with two guard bits; on conflict the excluded radius is `2^-k` for the
/// maximum oracle query `k`, the effective local modulus of continuity at
/// that name. When a uniform modulus is available it caps the query
/// schedule, bounding the radius from below.
pub fn linearise_local(
    p_c: &NonlinConstraint,
    modulus: Option<&Modulus>,
    alpha: &Assignment,
    delta: &Rational,
) -> Result<LinOutcome, EvalError> {
    let p = p_of_delta(delta).expect("engine validates delta > 0");
    let center = center_of(p_c, alpha);
    let point: Vec<Rational> = center.iter().map(|(_, q)| q.clone()).collect();
    let phi = xi_name_of(&point).as_name();
    let cap = modulus.map(|m| m.apply(p + 2) + 4);
    let result = eval_machine(p_c.term(), &phi, p + 2, cap)?;
    if delta_check(p_c, &result.value.to_rational(), delta) {
        return Ok(LinOutcome::Satisfied);
    }
    let eps = pow2(-(result.max_query as i64));
    Ok(LinOutcome::Clause {
        clause: box_exclusion_clause(&center, &eps),
        eps,
        mode_used: LinMode::Local,
    })
}

/// Result of one nonlinear step over the whole constraint set.
#[derive(Clone, Debug)]
pub enum NlinStepResult {
    DeltaSat,
    Lin {
        constraint: usize,
        clause: LinearClause,
        center: Vec<(VarId, Rational)>,
        eps: Rational,
        mode_used: LinMode,
    },
}

/// Iterates the nonlinear constraints in declaration order; the first one
/// whose lineariser returns a clause yields a linearisation step, and if all
/// report satisfaction the state is delta-satisfied. In full-box mode a
/// constraint without a uniform modulus falls back to the local strategy.
pub fn nlin_step(
    nonlinear: &[NonlinConstraint],
    moduli: &[Option<Modulus>],
    alpha: &Assignment,
    delta: &Rational,
    mode: LinMode,
) -> Result<NlinStepResult, EvalError> {
    for (i, p_c) in nonlinear.iter().enumerate() {
        let modulus = moduli.get(i).and_then(|m| m.as_ref());
        let outcome = match (mode, modulus) {
            (LinMode::FullBox, Some(m)) => linearise_fullbox(p_c, m, alpha, delta)?,
            // full-box mode without a modulus silently falls back to local
            (LinMode::FullBox, None) | (LinMode::Local, _) => {
                linearise_local(p_c, modulus, alpha, delta)?
            }
        };
        if let LinOutcome::Clause {
            clause,
            eps,
            mode_used,
        } = outcome
        {
            return Ok(NlinStepResult::Lin {
                constraint: i,
                clause,
                center: center_of(p_c, alpha),
                eps,
                mode_used,
            });
        }
    }
    Ok(NlinStepResult::DeltaSat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::realeval::modulus::uniform_modulus;
    use crate::term::{NlRel, Term};

    fn x() -> VarId {
        VarId(0)
    }
    fn y() -> VarId {
        VarId(1)
    }

    #[test]
    fn box_exclusion_examples() {
        // center 0, eps 1, one variable
        let c = box_exclusion_clause(&[(x(), rat(0, 1))], &rat(1, 1));
        assert_eq!(c.atoms().len(), 2);
        let inside = Assignment::from_pairs([(x(), rat(1, 2))]);
        assert_eq!(c.eval(&inside), Some(false));
        let boundary = Assignment::from_pairs([(x(), rat(1, 1))]);
        assert_eq!(c.eval(&boundary), Some(true));
        // center (2, 8/3), eps 1/4: componentwise c ± eps
        let c = box_exclusion_clause(&[(x(), rat(2, 1)), (y(), rat(8, 3))], &rat(1, 4));
        let betas = [
            (rat(7, 4), rat(8, 3), true),   // on the x boundary: satisfied
            (rat(2, 1), rat(35, 12), true), // on the y boundary
            (rat(2, 1), rat(8, 3), false),  // the center itself
            (rat(15, 8), rat(21, 8), false), // strictly inside the ball
            (rat(1, 1), rat(0, 1), true),
        ];
        for (xv, yv, expect) in betas {
            let beta = Assignment::from_pairs([(x(), xv), (y(), yv)]);
            assert_eq!(c.eval(&beta), Some(expect));
        }
    }

    #[test]
    fn fullbox_identity_satisfied() {
        // P: x >= 0 at x = 0 with delta = 1: 0 >= -1/2 holds
        let p = NonlinConstraint::new(Term::var(x()), NlRel::Ge);
        let m = Modulus::Shift(0);
        let alpha = Assignment::from_pairs([(x(), rat(0, 1))]);
        let out = linearise_fullbox(&p, &m, &alpha, &rat(1, 1)).unwrap();
        assert!(matches!(out, LinOutcome::Satisfied));
    }

    #[test]
    fn fullbox_sin_conflict_radius() {
        // sin(x) >= 0 at x = 7/2, delta = 1/4: sin(3.5) ~ -0.3508 < -1/8
        let p = NonlinConstraint::new(Term::sin(Term::var(x())), NlRel::Ge);
        let m = uniform_modulus(p.term(), &[x()], &[(rat(0, 1), rat(4, 1))]).unwrap();
        assert_eq!(m.apply(4), 4);
        let alpha = Assignment::from_pairs([(x(), rat(7, 2))]);
        match linearise_fullbox(&p, &m, &alpha, &rat(1, 4)).unwrap() {
            LinOutcome::Clause { eps, clause, .. } => {
                assert_eq!(eps, rat(1, 16));
                assert_eq!(clause.eval(&alpha), Some(false));
            }
            other => panic!("expected a clause, got {other:?}"),
        }
        // at x = 1/2 the same constraint is satisfied: sin(0.5) ~ 0.479
        let alpha = Assignment::from_pairs([(x(), rat(1, 2))]);
        assert!(matches!(
            linearise_fullbox(&p, &m, &alpha, &rat(1, 4)).unwrap(),
            LinOutcome::Satisfied
        ));
    }

    #[test]
    fn local_constant_conflict_has_unit_radius() {
        // (-5) + 0*x >= 0: constant-valued, no queries, radius 2^0 = 1
        let term = Term::add(
            Term::constant(rat(-5, 1)),
            Term::mul(Term::constant(rat(0, 1)), Term::var(x())),
        );
        let p = NonlinConstraint::new(term, NlRel::Ge);
        let alpha = Assignment::from_pairs([(x(), rat(7, 3))]);
        match linearise_local(&p, None, &alpha, &rat(1, 1)).unwrap() {
            LinOutcome::Clause { eps, clause, .. } => {
                assert_eq!(eps, rat(1, 1));
                assert_eq!(clause.eval(&alpha), Some(false));
                // the ball B(7/3, 1) is excluded
                let inside = Assignment::from_pairs([(x(), rat(3, 1))]);
                assert_eq!(clause.eval(&inside), Some(false));
            }
            other => panic!("expected a clause, got {other:?}"),
        }
    }

    #[test]
    fn local_sin_conflict_and_satisfaction() {
        let p = NonlinConstraint::new(Term::sin(Term::var(x())), NlRel::Ge);
        let m = uniform_modulus(p.term(), &[x()], &[(rat(0, 1), rat(4, 1))]).unwrap();
        let alpha = Assignment::from_pairs([(x(), rat(7, 2))]);
        match linearise_local(&p, Some(&m), &alpha, &rat(1, 4)).unwrap() {
            LinOutcome::Clause { eps, clause, .. } => {
                assert!(num_traits::Signed::is_positive(&eps));
                // query cap: eps >= 2^-(mu(p+2)+4) = 2^-(6+4)
                assert!(eps >= pow2(-10));
                assert_eq!(clause.eval(&alpha), Some(false));
            }
            other => panic!("expected a clause, got {other:?}"),
        }
        let alpha = Assignment::from_pairs([(x(), rat(1, 2))]);
        assert!(matches!(
            linearise_local(&p, Some(&m), &alpha, &rat(1, 4)).unwrap(),
            LinOutcome::Satisfied
        ));
    }

    #[test]
    fn nlin_step_declaration_order() {
        // empty set: delta-sat
        let r = nlin_step(&[], &[], &Assignment::empty(), &rat(1, 4), LinMode::Local).unwrap();
        assert!(matches!(r, NlinStepResult::DeltaSat));
        // first conflicting constraint wins
        let p1 = NonlinConstraint::new(Term::sin(Term::var(x())), NlRel::Ge);
        let p2 = NonlinConstraint::new(Term::var(x()), NlRel::Ge);
        let alpha = Assignment::from_pairs([(x(), rat(7, 2))]);
        let r = nlin_step(
            &[p2.clone(), p1.clone()],
            &[None, None],
            &alpha,
            &rat(1, 4),
            LinMode::Local,
        )
        .unwrap();
        match r {
            NlinStepResult::Lin { constraint, .. } => assert_eq!(constraint, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
