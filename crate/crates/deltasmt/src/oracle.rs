//! Independent reference decider: interval branch-and-prune over the
//! variable box with a grid witness search. Used for differential testing
//! against the main engine; shares only the core data model and the interval
//! enclosures.

use num_traits::Signed;

use crate::num::{rat, rational_ceil_to_grid, rational_floor_to_grid, Rational};
use crate::realeval::machine::eval_term_box;
use crate::realeval::DyadicInterval;
use crate::term::{Assignment, LinearAtom, LinearClause, NlRel, Rel, VarId};
use crate::transform::{bounds_analysis, SeparatedForm, VarBox};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BpResult {
    Unsat,
    DeltaSat(Assignment),
    Unknown,
}

/// Range of an affine atom body over a box: exact rational interval.
fn atom_range(atom: &LinearAtom, vars: &[VarId], box_: &[(Rational, Rational)]) -> (Rational, Rational) {
    let mut lo = atom.constant().clone();
    let mut hi = atom.constant().clone();
    for (&v, c) in atom.coeffs() {
        let i = vars.iter().position(|&u| u == v).expect("var in box");
        let (bl, bh) = &box_[i];
        if c.is_positive() {
            lo += c * bl;
            hi += c * bh;
        } else {
            lo += c * bh;
            hi += c * bl;
        }
    }
    (lo, hi)
}

/// Is the atom false at every point of the box?
fn atom_refuted(atom: &LinearAtom, vars: &[VarId], box_: &[(Rational, Rational)]) -> bool {
    let (lo, hi) = atom_range(atom, vars, box_);
    use num_traits::Zero;
    match atom.rel() {
        Rel::Gt => !hi.is_positive(),
        Rel::Ge => hi.is_negative(),
        Rel::Lt => !lo.is_negative(),
        Rel::Le => lo.is_positive(),
        Rel::Eq => lo.is_positive() || hi.is_negative(),
        Rel::Ne => lo.is_zero() && hi.is_zero(),
    }
}

fn clause_refuted(clause: &LinearClause, vars: &[VarId], box_: &[(Rational, Rational)]) -> bool {
    clause.atoms().iter().all(|a| atom_refuted(a, vars, box_))
}

/// Is the nonlinear constraint false at every point of the box? Enclosure
/// failures answer no (the box is kept and bisected further).
fn constraint_refuted(
    term: &crate::term::Term,
    rel: NlRel,
    vars: &[VarId],
    box_: &[(Rational, Rational)],
    prec: i64,
) -> bool {
    let all_vars: Vec<VarId> = term.vars().into_iter().collect();
    let ivs: Vec<DyadicInterval> = all_vars
        .iter()
        .map(|v| {
            let i = vars.iter().position(|u| u == v).expect("var in box");
            DyadicInterval::new(
                rational_floor_to_grid(&box_[i].0, prec),
                rational_ceil_to_grid(&box_[i].1, prec),
            )
        })
        .collect();
    match eval_term_box(term, &all_vars, &ivs, prec) {
        Ok(enclosure) => match rel {
            NlRel::Ge => enclosure.hi().is_negative(),
            NlRel::Gt => !enclosure.hi().is_positive(),
        },
        Err(_) => false,
    }
}

/// Certifies `f(alpha) + delta rel 0` by refining a point enclosure;
/// `Some(true)` and `Some(false)` are certain, `None` is out of budget.
pub fn certify_nonlinear_delta(
    term: &crate::term::Term,
    rel: NlRel,
    alpha: &Assignment,
    delta: &Rational,
) -> Option<bool> {
    let vars: Vec<VarId> = term.vars().into_iter().collect();
    let point: Vec<Rational> = vars
        .iter()
        .map(|v| alpha.get(*v).expect("total assignment").clone())
        .collect();
    for prec in [20i64, 40, 80, 160, 320] {
        let ivs: Vec<DyadicInterval> = point
            .iter()
            .map(|q| DyadicInterval::from_rational(q, prec))
            .collect();
        let Ok(enclosure) = eval_term_box(term, &vars, &ivs, prec) else {
            continue;
        };
        let lo = enclosure.lo().to_rational() + delta;
        let hi = enclosure.hi().to_rational() + delta;
        let certified_true = match rel {
            NlRel::Ge => !lo.is_negative(),
            NlRel::Gt => lo.is_positive(),
        };
        if certified_true {
            return Some(true);
        }
        let certified_false = match rel {
            NlRel::Ge => hi.is_negative(),
            NlRel::Gt => !hi.is_positive(),
        };
        if certified_false {
            return Some(false);
        }
    }
    None
}

/// Certifies that `alpha` delta-satisfies the separated form: the linear
/// part exactly, each nonlinear constraint through its weakening.
pub fn certify_delta_model(sf: &SeparatedForm, delta: &Rational, alpha: &Assignment) -> bool {
    if crate::term::eval_clauses(&sf.linear, alpha) != Some(true) {
        return false;
    }
    sf.nonlinear
        .iter()
        .all(|p| certify_nonlinear_delta(p.term(), p.rel(), alpha, delta) == Some(true))
}

/// Does `alpha` satisfy the unweakened formula? Certain answers only;
/// `None` when a transcendental value is too close to a boundary to decide
/// within budget.
pub fn exactly_satisfies(sf: &SeparatedForm, alpha: &Assignment) -> Option<bool> {
    match crate::term::eval_clauses(&sf.linear, alpha) {
        Some(true) => {}
        Some(false) => return Some(false),
        None => return None,
    }
    let mut all = true;
    for p in &sf.nonlinear {
        if let Some(v) = p.term().eval_exact(alpha) {
            if !p.rel().as_rel().holds(&v) {
                return Some(false);
            }
            continue;
        }
        match certify_nonlinear_delta(p.term(), p.rel(), alpha, &rat(0, 1) /* exact */) {
            Some(true) => {}
            Some(false) => return Some(false),
            None => all = false,
        }
    }
    if all {
        Some(true)
    } else {
        None
    }
}

struct Bp<'a> {
    sf: &'a SeparatedForm,
    vars: Vec<VarId>,
    delta: Rational,
    max_depth: u32,
    hit_depth_limit: bool,
}

impl Bp<'_> {
    fn run(&mut self, box_: Vec<(Rational, Rational)>, depth: u32) -> Option<Assignment> {
        // prune when some clause or constraint is false across the box
        for clause in &self.sf.linear {
            if clause_refuted(clause, &self.vars, &box_) {
                return None;
            }
        }
        let prec = 24 + 2 * depth as i64;
        for p in &self.sf.nonlinear {
            if constraint_refuted(p.term(), p.rel(), &self.vars, &box_, prec) {
                return None;
            }
        }
        // witness attempt at the center
        let center = Assignment::from_pairs(self.vars.iter().enumerate().map(|(i, &v)| {
            let (lo, hi) = &box_[i];
            (v, (lo + hi) / rat(2, 1))
        }));
        if certify_delta_model(self.sf, &self.delta, &center) {
            return Some(center);
        }
        if depth >= self.max_depth {
            self.hit_depth_limit = true;
            return None;
        }
        // bisect the widest dimension
        let (widest, _) = box_
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| (i, hi - lo))
            .max_by(|(_, a), (_, b)| a.cmp(b))
            .expect("non-empty box");
        let mid = (&box_[widest].0 + &box_[widest].1) / rat(2, 1);
        let mut left = box_.clone();
        left[widest].1 = mid.clone();
        let mut right = box_;
        right[widest].0 = mid;
        self.run(left, depth + 1)
            .or_else(|| self.run(right, depth + 1))
    }
}

/// Reference delta-decision by branch-and-prune over the variable box.
/// Requires a bounded instance.
pub fn bp_decide(sf: &SeparatedForm, delta: &Rational, max_depth: u32) -> BpResult {
    let bounds = bounds_analysis(sf);
    let mut vars = Vec::new();
    let mut box_ = Vec::new();
    for (i, vb) in bounds.var_bounds.iter().enumerate() {
        match vb {
            VarBox::Empty => return BpResult::Unsat,
            VarBox::Interval {
                lo: Some(lo),
                hi: Some(hi),
            } => {
                vars.push(VarId(i as u32));
                box_.push((lo.clone(), hi.clone()));
            }
            _ => return BpResult::Unknown,
        }
    }
    let mut bp = Bp {
        sf,
        vars,
        delta: delta.clone(),
        max_depth,
        hit_depth_limit: false,
    };
    match bp.run(box_, 0) {
        Some(alpha) => BpResult::DeltaSat(alpha),
        None if bp.hit_depth_limit => BpResult::Unknown,
        None => BpResult::Unsat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::transform::{normalize_predicates, to_separated_form};

    fn prep(text: &str) -> SeparatedForm {
        to_separated_form(&normalize_predicates(&parse(text).unwrap()))
    }

    #[test]
    fn linear_contradiction_unsat_at_depth_zero() {
        let sf = prep("(declare-const x Real)(assert (>= x 1))(assert (<= x 0))");
        assert_eq!(bp_decide(&sf, &rat(1, 100), 4), BpResult::Unsat);
    }

    #[test]
    fn sin_on_unit_box_delta_sat() {
        let sf = prep(
            "(declare-const x Real)(assert (>= x 0))(assert (<= x 1))(assert (>= (sin x) 0))",
        );
        match bp_decide(&sf, &rat(1, 100), 12) {
            BpResult::DeltaSat(alpha) => {
                assert!(certify_delta_model(&sf, &rat(1, 100), &alpha));
            }
            other => panic!("expected delta-sat, got {other:?}"),
        }
    }

    #[test]
    fn fig_instance_unsat() {
        let sf = prep(
            "(declare-const x Real)(declare-const y Real)\
             (assert (<= (+ (/ x 4) 1) y))(assert (<= y (* 4 (- x 1))))(assert (<= y (/ 1 x)))\
             (assert (>= x (/ 4 3)))(assert (<= x 10))(assert (>= y 0))(assert (<= y 10))",
        );
        assert_eq!(bp_decide(&sf, &rat(1, 100), 16), BpResult::Unsat);
    }

    #[test]
    fn circle_line_unsat() {
        let sf = prep(
            "(declare-const x Real)(declare-const y Real)\
             (assert (>= x 0))(assert (<= x (/ 3 2)))(assert (>= y 0))(assert (<= y (/ 3 2)))\
             (assert (<= (+ (* x x) (* y y)) 1))(assert (>= (+ x y) (/ 3 2)))",
        );
        assert_eq!(bp_decide(&sf, &rat(1, 100), 16), BpResult::Unsat);
    }

    #[test]
    fn certifier_rejects_violations() {
        let sf = prep(
            "(declare-const x Real)(assert (>= x 0))(assert (<= x 1))(assert (>= (sin x) 0))",
        );
        let bad = Assignment::from_pairs([(VarId(0), rat(3, 1))]); // violates x <= 1
        assert!(!certify_delta_model(&sf, &rat(1, 100), &bad));
        let good = Assignment::from_pairs([(VarId(0), rat(1, 2))]);
        assert!(certify_delta_model(&sf, &rat(1, 100), &good));
        assert_eq!(exactly_satisfies(&sf, &good), Some(true));
    }
}
