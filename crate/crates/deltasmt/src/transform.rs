//! Frontend transformations: predicate normalization, separated linear form,
//! delta-weakening and boundedness / domain analysis.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::linarith::{clause_feasible_values, HiB, IntervalSet, LoB};
use crate::num::{rat_int, rational_ceil_to_grid, rational_floor_to_grid, Rational};
use crate::parse::{BoolExpr, InputScript};
use crate::realeval::machine::eval_term_box;
use crate::realeval::modulus::DeltaError;
use crate::realeval::DyadicInterval;
use crate::term::{
    Assignment, LinearAtom, LinearClause, NlRel, NonlinConstraint, Rel, SymbolTable, Term, VarId,
};

/// Separated linear form: a clause set over linear atoms plus atomic
/// nonlinear constraints, equisatisfiable with the input over the original
/// variables.
#[derive(Clone, Debug)]
pub struct SeparatedForm {
    pub symbols: SymbolTable,
    pub linear: Vec<LinearClause>,
    pub nonlinear: Vec<NonlinConstraint>,
    /// fresh variables defined as the value of a nonlinear term
    pub fresh_defs: Vec<(VarId, Term)>,
    /// fresh indicator variables from clause-form conversion, with the
    /// subformula each one stands for
    pub indicators: Vec<(VarId, BoolExpr)>,
    /// number of user-declared variables (a prefix of the symbol table)
    pub n_original: usize,
}

/// Per-variable bounds and per-constraint domain boxes.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    /// closed hull [lo, hi] of the univariate constraints per variable;
    /// `None` on a side means unbounded, `Empty` marks an infeasible box
    pub var_bounds: Vec<VarBox>,
    pub bounded: bool,
    /// per nonlinear constraint: the closed box over its variables, when
    /// every one of them is bounded
    pub constraint_boxes: Vec<Option<Vec<(Rational, Rational)>>>,
    pub domain_violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarBox {
    Empty,
    Interval {
        lo: Option<Rational>,
        hi: Option<Rational>,
    },
}

impl BoundsReport {
    /// Max-norm diameter of the variable box, when finite.
    pub fn diameter(&self) -> Option<Rational> {
        let mut d = rat_int(0);
        for vb in &self.var_bounds {
            match vb {
                VarBox::Empty => {}
                VarBox::Interval {
                    lo: Some(lo),
                    hi: Some(hi),
                } => {
                    let w = hi - lo;
                    if w > d {
                        d = w;
                    }
                }
                _ => return None,
            }
        }
        Some(d)
    }
}

// ---------------------------------------------------------------------------
// Predicate normalization
// ---------------------------------------------------------------------------

/// Pushes negations to atoms and eliminates them, then rewrites every
/// relation into `{>, >=}` form: `t <= 0` becomes `-t >= 0`, `t = 0` becomes
/// the two-sided conjunction, and `t != 0` becomes `(-t > 0) \/ (t > 0)`.
pub fn normalize_predicates(script: &InputScript) -> InputScript {
    InputScript {
        symbols: script.symbols.clone(),
        assertions: script.assertions.iter().map(|f| norm(f, false)).collect(),
        commands: script.commands.clone(),
    }
}

fn norm(f: &BoolExpr, negate: bool) -> BoolExpr {
    match f {
        BoolExpr::Not(inner) => norm(inner, !negate),
        BoolExpr::And(xs) => {
            let parts = xs.iter().map(|x| norm(x, negate)).collect();
            if negate {
                BoolExpr::Or(parts)
            } else {
                BoolExpr::And(parts)
            }
        }
        BoolExpr::Or(xs) => {
            let parts = xs.iter().map(|x| norm(x, negate)).collect();
            if negate {
                BoolExpr::And(parts)
            } else {
                BoolExpr::Or(parts)
            }
        }
        BoolExpr::Atom(rel, t) => {
            let rel = if negate { rel.negated() } else { *rel };
            match rel {
                Rel::Gt | Rel::Ge => BoolExpr::Atom(rel, t.clone()),
                Rel::Lt => BoolExpr::Atom(Rel::Gt, Term::neg(t.clone())),
                Rel::Le => BoolExpr::Atom(Rel::Ge, Term::neg(t.clone())),
                Rel::Eq => BoolExpr::And(vec![
                    BoolExpr::Atom(Rel::Ge, Term::neg(t.clone())),
                    BoolExpr::Atom(Rel::Ge, t.clone()),
                ]),
                Rel::Ne => BoolExpr::Or(vec![
                    BoolExpr::Atom(Rel::Gt, Term::neg(t.clone())),
                    BoolExpr::Atom(Rel::Gt, t.clone()),
                ]),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Affine recognition
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct Affine {
    constant: Rational,
    coeffs: BTreeMap<VarId, Rational>,
}

impl Affine {
    fn constant_only(q: Rational) -> Self {
        Affine {
            constant: q,
            coeffs: BTreeMap::new(),
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Attempts to read a term as an affine rational combination. Products are
/// affine only when one side is a constant; a zero constant times a
/// non-affine term is deliberately not collapsed, since that would change
/// the term's domain.
fn as_affine(t: &Term) -> Option<Affine> {
    match t {
        Term::Const(q) => Some(Affine::constant_only(q.clone())),
        Term::Var(v) => {
            let mut coeffs = BTreeMap::new();
            coeffs.insert(*v, rat_int(1));
            Some(Affine {
                constant: rat_int(0),
                coeffs,
            })
        }
        Term::Add(a, b) => {
            let (mut a, b) = (as_affine(a)?, as_affine(b)?);
            a.constant += b.constant;
            for (v, c) in b.coeffs {
                let e = a.coeffs.entry(v).or_insert_with(|| rat_int(0));
                *e += c;
                if e.is_zero() {
                    a.coeffs.remove(&v);
                }
            }
            Some(a)
        }
        Term::Neg(a) => {
            let mut a = as_affine(a)?;
            a.constant = -a.constant;
            for c in a.coeffs.values_mut() {
                *c = -c.clone();
            }
            Some(a)
        }
        Term::Mul(a, b) => {
            let fa = as_affine(a)?;
            let fb = as_affine(b)?;
            let (scalar, mut other) = if fa.is_constant() {
                (fa.constant, fb)
            } else if fb.is_constant() {
                (fb.constant, fa)
            } else {
                return None;
            };
            other.constant *= &scalar;
            if scalar.is_zero() {
                other.coeffs.clear();
            } else {
                for c in other.coeffs.values_mut() {
                    *c *= &scalar;
                }
            }
            Some(other)
        }
        Term::Div(a, b) => {
            let fb = as_affine(b)?;
            if !fb.is_constant() || fb.constant.is_zero() {
                return None;
            }
            let mut fa = as_affine(a)?;
            fa.constant /= &fb.constant;
            for c in fa.coeffs.values_mut() {
                *c /= &fb.constant;
            }
            Some(fa)
        }
        Term::Pow(a, n) => match n {
            0 => Some(Affine::constant_only(rat_int(1))),
            1 => as_affine(a),
            _ => {
                let fa = as_affine(a)?;
                if fa.is_constant() {
                    let t = Term::pow(Term::constant(fa.constant), *n);
                    match t {
                        Term::Const(q) => Some(Affine::constant_only(q)),
                        _ => None,
                    }
                } else {
                    None
                }
            }
        },
        Term::Recip(a) => {
            let fa = as_affine(a)?;
            if fa.is_constant() && !fa.constant.is_zero() {
                Some(Affine::constant_only(fa.constant.recip()))
            } else {
                None
            }
        }
        Term::Sqrt(_) | Term::Sin(_) | Term::Cos(_) | Term::Exp(_) | Term::Log(_) => None,
    }
}

// ---------------------------------------------------------------------------
// Separated linear form
// ---------------------------------------------------------------------------

/// Converts a normalized script into separated linear form: nonlinear atoms
/// under Boolean structure are abstracted by fresh defined variables,
/// top-level atomic nonlinear constraints pass through unchanged, and the
/// linear remainder is converted into a clause set.
pub fn to_separated_form(script: &InputScript) -> SeparatedForm {
    let mut sf = SeparatedForm {
        symbols: script.symbols.clone(),
        linear: Vec::new(),
        nonlinear: Vec::new(),
        fresh_defs: Vec::new(),
        indicators: Vec::new(),
        n_original: script.symbols.len(),
    };
    let mut def_cache: BTreeMap<Term, VarId> = BTreeMap::new();

    for assertion in &script.assertions {
        for conjunct in flatten_and(assertion) {
            match &conjunct {
                BoolExpr::Atom(rel, t) => {
                    let nl_rel = nl_rel(*rel);
                    match as_affine(t) {
                        Some(aff) => {
                            sf.linear
                                .push(LinearClause::unit(LinearAtom::new(aff.constant, aff.coeffs, *rel)));
                        }
                        None => {
                            sf.nonlinear.push(NonlinConstraint::new(t.clone(), nl_rel));
                        }
                    }
                }
                other => {
                    let abstracted = abstract_nonlinear(other, &mut sf, &mut def_cache);
                    let atom_count = count_atoms(&abstracted);
                    if atom_count <= 8 {
                        for clause in distribute(&abstracted) {
                            push_clause(&mut sf.linear, clause);
                        }
                    } else {
                        clausify_with_indicators(&abstracted, &mut sf);
                    }
                }
            }
        }
    }
    add_fresh_definition_bounds(&mut sf);
    sf
}

fn nl_rel(rel: Rel) -> NlRel {
    match rel {
        Rel::Gt => NlRel::Gt,
        Rel::Ge => NlRel::Ge,
        other => unreachable!("normalization leaves only > and >=, found {other:?}"),
    }
}

fn flatten_and(f: &BoolExpr) -> Vec<BoolExpr> {
    match f {
        BoolExpr::And(xs) => xs.iter().flat_map(flatten_and).collect(),
        other => vec![other.clone()],
    }
}

/// Replaces nonlinear atoms by `t rel 0` over a fresh variable `t`, adding
/// the two defining constraints `t - f >= 0` and `f - t >= 0`. Identical
/// nonlinear terms share their defined variable.
fn abstract_nonlinear(
    f: &BoolExpr,
    sf: &mut SeparatedForm,
    cache: &mut BTreeMap<Term, VarId>,
) -> BoolExpr {
    match f {
        BoolExpr::And(xs) => BoolExpr::And(
            xs.iter()
                .map(|x| abstract_nonlinear(x, sf, cache))
                .collect(),
        ),
        BoolExpr::Or(xs) => BoolExpr::Or(
            xs.iter()
                .map(|x| abstract_nonlinear(x, sf, cache))
                .collect(),
        ),
        BoolExpr::Not(_) => unreachable!("normalized formulas are negation-free"),
        BoolExpr::Atom(rel, t) => {
            if as_affine(t).is_some() {
                return BoolExpr::Atom(*rel, t.clone());
            }
            let var = *cache.entry(t.clone()).or_insert_with(|| {
                let v = sf.symbols.fresh("t");
                sf.fresh_defs.push((v, t.clone()));
                // t - f >= 0 and f - t >= 0
                sf.nonlinear.push(NonlinConstraint::new(
                    Term::sub(Term::var(v), t.clone()),
                    NlRel::Ge,
                ));
                sf.nonlinear.push(NonlinConstraint::new(
                    Term::sub(t.clone(), Term::var(v)),
                    NlRel::Ge,
                ));
                v
            });
            BoolExpr::Atom(*rel, Term::var(var))
        }
    }
}

fn count_atoms(f: &BoolExpr) -> usize {
    match f {
        BoolExpr::And(xs) | BoolExpr::Or(xs) => xs.iter().map(count_atoms).sum(),
        BoolExpr::Not(x) => count_atoms(x),
        BoolExpr::Atom(..) => 1,
    }
}

fn atom_of(rel: Rel, t: &Term) -> LinearAtom {
    let aff = as_affine(t).expect("abstracted formulas are all-linear");
    LinearAtom::new(aff.constant, aff.coeffs, rel)
}

/// Plain distributive clause-form conversion for small formulas.
fn distribute(f: &BoolExpr) -> Vec<LinearClause> {
    match f {
        BoolExpr::Atom(rel, t) => vec![LinearClause::unit(atom_of(*rel, t))],
        BoolExpr::And(xs) => xs.iter().flat_map(distribute).collect(),
        BoolExpr::Or(xs) => {
            let mut acc: Vec<Vec<LinearAtom>> = vec![vec![]];
            for x in xs {
                let clauses = distribute(x);
                let mut next = Vec::new();
                for prefix in &acc {
                    for c in &clauses {
                        let mut atoms = prefix.clone();
                        atoms.extend(c.atoms().iter().cloned());
                        next.push(atoms);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(LinearClause::new).collect()
        }
        BoolExpr::Not(_) => unreachable!(),
    }
}

/// Clause-form conversion with fresh real indicator variables for larger
/// formulas: an indicator `b in [0,1]` stands for a subformula, `b >= 1`
/// reads as "true", and only the positive direction is encoded.
fn clausify_with_indicators(f: &BoolExpr, sf: &mut SeparatedForm) {
    let top = encode(f, sf);
    // assert the top literal
    push_clause(&mut sf.linear, LinearClause::unit(top));
}

/// Returns a linear atom equivalent (for satisfiability) to the formula.
fn encode(f: &BoolExpr, sf: &mut SeparatedForm) -> LinearAtom {
    match f {
        BoolExpr::Atom(rel, t) => atom_of(*rel, t),
        BoolExpr::And(xs) | BoolExpr::Or(xs) => {
            let is_and = matches!(f, BoolExpr::And(_));
            let lits: Vec<LinearAtom> = xs.iter().map(|x| encode(x, sf)).collect();
            let b = sf.symbols.fresh("b");
            sf.indicators.push((b, f.clone()));
            // 0 <= b <= 1
            push_clause(
                &mut sf.linear,
                LinearClause::unit(LinearAtom::new(rat_int(0), [(b, rat_int(1))], Rel::Ge)),
            );
            push_clause(
                &mut sf.linear,
                LinearClause::unit(LinearAtom::new(rat_int(1), [(b, rat_int(-1))], Rel::Ge)),
            );
            // not-b literal: 1 - b > 0
            let not_b = LinearAtom::new(rat_int(1), [(b, rat_int(-1))], Rel::Gt);
            let b_true = LinearAtom::new(rat_int(-1), [(b, rat_int(1))], Rel::Ge);
            if is_and {
                // b -> each lit
                for lit in &lits {
                    push_clause(
                        &mut sf.linear,
                        LinearClause::new(vec![not_b.clone(), lit.clone()]),
                    );
                }
            } else {
                // b -> some lit
                let mut atoms = vec![not_b];
                atoms.extend(lits);
                push_clause(&mut sf.linear, LinearClause::new(atoms));
            }
            b_true
        }
        BoolExpr::Not(_) => unreachable!(),
    }
}

fn push_clause(linear: &mut Vec<LinearClause>, clause: LinearClause) {
    if !linear.contains(&clause) {
        linear.push(clause);
    }
}

/// Bounds fresh defined variables by an interval enclosure of their defining
/// term over the current variable box (inflated by one to keep weakened
/// models inside), so that separation preserves the bounded-instance
/// property.
fn add_fresh_definition_bounds(sf: &mut SeparatedForm) {
    if sf.fresh_defs.is_empty() {
        return;
    }
    let bounds = variable_hulls(&sf.linear, sf.symbols.len());
    for (v, term) in sf.fresh_defs.clone() {
        let vars: Vec<VarId> = term.vars().into_iter().collect();
        let mut box_ = Vec::with_capacity(vars.len());
        let mut ok = true;
        for &u in &vars {
            match &bounds[u.0 as usize] {
                VarBox::Interval {
                    lo: Some(lo),
                    hi: Some(hi),
                } => box_.push(DyadicInterval::new(
                    rational_floor_to_grid(lo, 20),
                    rational_ceil_to_grid(hi, 20),
                )),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let Ok(enclosure) = eval_term_box(&term, &vars, &box_, 20) else {
            continue;
        };
        let lo = enclosure.lo().to_rational() - rat_int(1);
        let hi = enclosure.hi().to_rational() + rat_int(1);
        push_clause(
            &mut sf.linear,
            LinearClause::unit(LinearAtom::new(-lo, [(v, rat_int(1))], Rel::Ge)),
        );
        push_clause(
            &mut sf.linear,
            LinearClause::unit(LinearAtom::new(hi, [(v, rat_int(-1))], Rel::Ge)),
        );
    }
}

// ---------------------------------------------------------------------------
// Delta-weakening
// ---------------------------------------------------------------------------

/// The delta-weakening of a separated form: linear clauses unchanged, each
/// nonlinear `f(x) rel 0` becomes `f(x) + delta rel 0`.
pub fn delta_weaken(sf: &SeparatedForm, delta: &Rational) -> Result<SeparatedForm, DeltaError> {
    if !delta.is_positive() {
        return Err(DeltaError);
    }
    let nonlinear = sf
        .nonlinear
        .iter()
        .map(|p| {
            NonlinConstraint::new(
                Term::add(p.term().clone(), Term::constant(delta.clone())),
                p.rel(),
            )
        })
        .collect();
    Ok(SeparatedForm {
        symbols: sf.symbols.clone(),
        linear: sf.linear.clone(),
        nonlinear,
        fresh_defs: sf.fresh_defs.clone(),
        indicators: sf.indicators.clone(),
        n_original: sf.n_original,
    })
}

// ---------------------------------------------------------------------------
// Bounds analysis
// ---------------------------------------------------------------------------

/// Hull of the univariate linear constraints per variable.
fn variable_hulls(linear: &[LinearClause], n_vars: usize) -> Vec<VarBox> {
    let empty_alpha = Assignment::empty();
    (0..n_vars as u32)
        .map(|i| {
            let v = VarId(i);
            let mut set = IntervalSet::full();
            for clause in linear {
                let vars = clause.vars();
                if vars.len() != 1 || !vars.contains(&v) {
                    continue;
                }
                if let Some(vals) = clause_feasible_values(clause, &empty_alpha, v) {
                    set = set.intersect(&vals);
                }
            }
            hull_of(&set)
        })
        .collect()
}

fn hull_of(set: &IntervalSet) -> VarBox {
    let ivs = set.intervals();
    if ivs.is_empty() {
        return VarBox::Empty;
    }
    let lo = match &ivs.first().unwrap().lo {
        LoB::NegInf => None,
        LoB::Gt(q) | LoB::Ge(q) => Some(q.clone()),
    };
    let hi = match &ivs.last().unwrap().hi {
        HiB::PosInf => None,
        HiB::Lt(q) | HiB::Le(q) => Some(q.clone()),
    };
    VarBox::Interval { lo, hi }
}

/// Computes per-variable bounds, the bounded-instance flag, per-constraint
/// domain boxes, and verifies that the closure of each constraint box lies
/// inside the domain of its term (divisor, logarithm and square-root
/// arguments are checked by interval evaluation of subterm enclosures).
pub fn bounds_analysis(sf: &SeparatedForm) -> BoundsReport {
    let var_bounds = variable_hulls(&sf.linear, sf.symbols.len());
    let mut bounded = true;
    for vb in &var_bounds {
        match vb {
            VarBox::Empty => {}
            VarBox::Interval {
                lo: Some(_),
                hi: Some(_),
            } => {}
            _ => bounded = false,
        }
    }
    let mut constraint_boxes = Vec::with_capacity(sf.nonlinear.len());
    let mut domain_violations = Vec::new();
    for (idx, p) in sf.nonlinear.iter().enumerate() {
        let mut box_ = Vec::new();
        let mut ok = true;
        for &v in p.vars() {
            match &var_bounds[v.0 as usize] {
                VarBox::Empty => {
                    // infeasible linear box: use a degenerate point so the
                    // constraint still has a well-defined (empty) domain
                    box_.push((rat_int(0), rat_int(0)));
                }
                VarBox::Interval {
                    lo: Some(lo),
                    hi: Some(hi),
                } => box_.push((lo.clone(), hi.clone())),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            constraint_boxes.push(None);
            continue;
        }
        let vars: Vec<VarId> = p.vars().to_vec();
        let intervals: Vec<DyadicInterval> = box_
            .iter()
            .map(|(lo, hi)| {
                DyadicInterval::new(rational_floor_to_grid(lo, 30), rational_ceil_to_grid(hi, 30))
            })
            .collect();
        check_domain(p.term(), &vars, &intervals, idx, &mut domain_violations);
        constraint_boxes.push(Some(box_));
    }
    BoundsReport {
        var_bounds,
        bounded,
        constraint_boxes,
        domain_violations,
    }
}

/// Walks every subterm and records divisors that may reach zero, logarithm
/// arguments that may be non-positive and square-root arguments that may be
/// negative over the closure of the box.
fn check_domain(
    term: &Term,
    vars: &[VarId],
    box_: &[DyadicInterval],
    constraint: usize,
    out: &mut Vec<String>,
) {
    let enclose = |t: &Term| eval_term_box(t, vars, box_, 30);
    match term {
        Term::Const(_) | Term::Var(_) => {}
        Term::Add(a, b) | Term::Mul(a, b) => {
            check_domain(a, vars, box_, constraint, out);
            check_domain(b, vars, box_, constraint, out);
        }
        Term::Neg(a) | Term::Pow(a, _) | Term::Sin(a) | Term::Cos(a) | Term::Exp(a) => {
            check_domain(a, vars, box_, constraint, out);
            if let Term::Pow(_, n) = term {
                if *n < 0 {
                    match enclose(a) {
                        Ok(iv) if !iv.contains_zero() => {}
                        _ => out.push(format!(
                            "constraint {constraint}: negative power base may reach zero"
                        )),
                    }
                }
            }
        }
        Term::Div(a, b) => {
            check_domain(a, vars, box_, constraint, out);
            check_domain(b, vars, box_, constraint, out);
            match enclose(b) {
                Ok(iv) if !iv.contains_zero() => {}
                _ => out.push(format!(
                    "constraint {constraint}: divisor enclosure contains zero on the domain box"
                )),
            }
        }
        Term::Recip(a) => {
            check_domain(a, vars, box_, constraint, out);
            match enclose(a) {
                Ok(iv) if !iv.contains_zero() => {}
                _ => out.push(format!(
                    "constraint {constraint}: divisor enclosure contains zero on the domain box"
                )),
            }
        }
        Term::Sqrt(a) => {
            check_domain(a, vars, box_, constraint, out);
            match enclose(a) {
                Ok(iv) if !iv.lo().is_negative() => {}
                _ => out.push(format!(
                    "constraint {constraint}: square-root argument may be negative on the domain box"
                )),
            }
        }
        Term::Log(a) => {
            check_domain(a, vars, box_, constraint, out);
            match enclose(a) {
                Ok(iv) if iv.lo().is_positive() => {}
                _ => out.push(format!(
                    "constraint {constraint}: logarithm argument may be non-positive on the domain box"
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::parse::parse;

    fn pipeline(text: &str) -> SeparatedForm {
        to_separated_form(&normalize_predicates(&parse(text).unwrap()))
    }

    #[test]
    fn normalize_examples() {
        // f(x) = 0 -> two-sided >=
        let s = parse("(declare-const x Real)(assert (= (sin x) 0))").unwrap();
        let n = normalize_predicates(&s);
        match &n.assertions[0] {
            BoolExpr::And(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(parts
                    .iter()
                    .all(|p| matches!(p, BoolExpr::Atom(Rel::Ge, _))));
            }
            other => panic!("unexpected {other:?}"),
        }
        // f(x) < 0 -> -f(x) > 0
        let s = parse("(declare-const x Real)(assert (< (sin x) 0))").unwrap();
        let n = normalize_predicates(&s);
        assert!(matches!(&n.assertions[0], BoolExpr::Atom(Rel::Gt, _)));
        // f(x) != 0 -> (-f > 0) \/ (f > 0)
        let s = parse("(declare-const x Real)(assert (distinct (sin x) 0))").unwrap();
        let n = normalize_predicates(&s);
        match &n.assertions[0] {
            BoolExpr::Or(parts) => {
                assert!(parts
                    .iter()
                    .all(|p| matches!(p, BoolExpr::Atom(Rel::Gt, _))));
            }
            other => panic!("unexpected {other:?}"),
        }
        // negation elimination
        let s = parse("(declare-const x Real)(assert (not (< x 1)))").unwrap();
        let n = normalize_predicates(&s);
        assert!(matches!(&n.assertions[0], BoolExpr::Atom(Rel::Ge, _)));
    }

    #[test]
    fn separated_form_all_linear() {
        let sf = pipeline("(declare-const x Real)(assert (>= x 1))(assert (<= x 3))");
        assert_eq!(sf.linear.len(), 2);
        assert!(sf.nonlinear.is_empty());
        assert!(sf.fresh_defs.is_empty());
    }

    #[test]
    fn separated_form_top_level_atom_passes_through() {
        // y <= 1/x becomes the atomic constraint 1/x - y >= 0 without fresh variables
        let sf = pipeline(
            "(declare-const x Real)(declare-const y Real)(assert (<= y (/ 1 x)))",
        );
        assert!(sf.fresh_defs.is_empty());
        assert_eq!(sf.nonlinear.len(), 1);
        assert_eq!(sf.nonlinear[0].rel(), NlRel::Ge);
        let alpha = Assignment::from_pairs([(VarId(0), rat(2, 1)), (VarId(1), rat(1, 4))]);
        // 1/2 - 1/4 = 1/4
        assert_eq!(
            sf.nonlinear[0].term().eval_exact(&alpha),
            Some(rat(1, 4))
        );
    }

    #[test]
    fn separated_form_structure_introduces_fresh_variable() {
        let sf = pipeline(
            "(declare-const x Real)(assert (>= x (- 4)))(assert (<= x 4))(assert (or (> (sin x) 0) (< x 0)))",
        );
        assert_eq!(sf.fresh_defs.len(), 1);
        let t = sf.fresh_defs[0].0;
        // two defining constraints
        assert_eq!(sf.nonlinear.len(), 2);
        // one clause mentioning both t and x
        let clause = sf
            .linear
            .iter()
            .find(|c| c.atoms().len() == 2)
            .expect("disjunctive clause present");
        assert!(clause.vars().contains(&t));
        assert!(clause.vars().contains(&VarId(0)));
        // fresh variable got bound clauses from the enclosure of sin
        let t_units: Vec<_> = sf
            .linear
            .iter()
            .filter(|c| c.vars().len() == 1 && c.vars().contains(&t))
            .collect();
        assert!(t_units.len() >= 2);
    }

    #[test]
    fn delta_weaken_examples() {
        // linear untouched
        let sf = pipeline("(declare-const x Real)(assert (>= x 1))");
        let w = delta_weaken(&sf, &rat(1, 2)).unwrap();
        assert_eq!(w.linear, sf.linear);
        // sin(x) >= 0 weakens to sin(x) + 1/2 >= 0
        let sf = pipeline("(declare-const x Real)(assert (>= (sin x) 0))");
        let w = delta_weaken(&sf, &rat(1, 2)).unwrap();
        let alpha = Assignment::from_pairs([(VarId(0), rat(0, 1))]);
        // term evaluates symbolically: sin(0) + 1/2; check shape via vars
        assert_eq!(w.nonlinear[0].vars(), sf.nonlinear[0].vars());
        assert!(matches!(w.nonlinear[0].term(), Term::Add(_, _)));
        drop(alpha);
        assert!(delta_weaken(&sf, &rat(0, 1)).is_err());
    }

    #[test]
    fn bounds_analysis_examples() {
        let sf = pipeline(
            "(declare-const x Real)(declare-const y Real)\
             (assert (>= x 0))(assert (<= x 1))(assert (>= y (- 1)))(assert (<= y 2))",
        );
        let b = bounds_analysis(&sf);
        assert!(b.bounded);
        assert_eq!(
            b.var_bounds[0],
            VarBox::Interval {
                lo: Some(rat(0, 1)),
                hi: Some(rat(1, 1))
            }
        );
        assert_eq!(b.diameter(), Some(rat(3, 1)));
        // no univariate clause on y -> unbounded
        let sf = pipeline("(declare-const x Real)(declare-const y Real)(assert (>= x 0))(assert (<= x 1))(assert (>= (+ x y) 0))");
        let b = bounds_analysis(&sf);
        assert!(!b.bounded);
        assert_eq!(b.var_bounds[1], VarBox::Interval { lo: None, hi: None });
    }

    #[test]
    fn domain_check_divisor() {
        // 1/x with x in [4/3, 10]: fine
        let sf = pipeline(
            "(declare-const x Real)(declare-const y Real)\
             (assert (>= x (/ 4 3)))(assert (<= x 10))(assert (>= y 0))(assert (<= y 10))\
             (assert (<= y (/ 1 x)))",
        );
        let b = bounds_analysis(&sf);
        assert!(b.bounded && b.domain_violations.is_empty());
        // x in [-1, 1]: divisor may be zero
        let sf = pipeline(
            "(declare-const x Real)(declare-const y Real)\
             (assert (>= x (- 1)))(assert (<= x 1))(assert (>= y 0))(assert (<= y 1))\
             (assert (<= y (/ 1 x)))",
        );
        let b = bounds_analysis(&sf);
        assert!(!b.domain_violations.is_empty());
        // log over a box touching zero: closure violates the domain
        let sf = pipeline(
            "(declare-const x Real)(assert (> x 0))(assert (<= x 1))(assert (>= (log x) (- 10)))",
        );
        let b = bounds_analysis(&sf);
        assert!(!b.domain_violations.is_empty());
    }

    #[test]
    fn indicator_encoding_for_large_formulas() {
        // ten atoms force the indicator path
        let mut text = String::from("(declare-const x Real)(assert (or ");
        for i in 1..=5 {
            text.push_str(&format!("(and (>= x {i}) (<= x {i})) "));
        }
        text.push_str("))");
        let sf = pipeline(&text);
        assert!(!sf.indicators.is_empty());
        // every indicator is boxed into [0, 1]
        for (b, _) in &sf.indicators {
            let units = sf
                .linear
                .iter()
                .filter(|c| c.vars().len() == 1 && c.vars().contains(b))
                .count();
            assert!(units >= 2);
        }
    }
}
