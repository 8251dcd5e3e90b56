//! Shared term and formula data model: interned variables, linear atoms and
//! clauses, and nonlinear constraint terms.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::num::{rat_int, Rational};

/// Interned variable index. Declaration order is also assignment order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    index: std::collections::HashMap<String, VarId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = VarId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }

    /// Interns a fresh variable not colliding with any existing name.
    pub fn fresh(&mut self, hint: &str) -> VarId {
        let mut i = 0usize;
        loop {
            let candidate = format!("{hint}{i}");
            if !self.index.contains_key(&candidate) {
                return self.intern(&candidate);
            }
            i += 1;
        }
    }
}

/// Relation of an atom against zero. The solver pipeline only produces `Gt`
/// and `Ge` after predicate normalization; the other relations exist for the
/// frontend and for direct evaluation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    pub fn holds(&self, v: &Rational) -> bool {
        match self {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
        }
    }

    /// The relation satisfied by `-t` exactly when `self` is satisfied by `t`.
    pub fn flipped(&self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Gt => Rel::Lt,
            Rel::Ge => Rel::Le,
            Rel::Eq => Rel::Eq,
            Rel::Ne => Rel::Ne,
        }
    }

    /// Negation of the predicate.
    pub fn negated(&self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "=",
            Rel::Ne => "distinct",
        }
    }
}

/// Relation of a nonlinear constraint: only `>` and `>=` survive
/// normalization.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NlRel {
    Gt,
    Ge,
}

impl NlRel {
    pub fn as_rel(&self) -> Rel {
        match self {
            NlRel::Gt => Rel::Gt,
            NlRel::Ge => Rel::Ge,
        }
    }

    /// `v ⋄ bound` with exact rational comparison.
    pub fn holds_against(&self, v: &Rational, bound: &Rational) -> bool {
        match self {
            NlRel::Gt => v > bound,
            NlRel::Ge => v >= bound,
        }
    }
}

/// `constant + Σ coeff_i · x_i  rel  0`, stored in a canonical primitive
/// integer scaling (no zero coefficients, gcd of all numerators = 1).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearAtom {
    constant: Rational,
    coeffs: BTreeMap<VarId, Rational>,
    rel: Rel,
}

impl LinearAtom {
    pub fn new(constant: Rational, coeffs: impl IntoIterator<Item = (VarId, Rational)>, rel: Rel) -> Self {
        let mut map: BTreeMap<VarId, Rational> = BTreeMap::new();
        for (v, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(v).or_insert_with(|| rat_int(0));
            *entry += c;
            if entry.is_zero() {
                map.remove(&v);
            }
        }
        let mut atom = LinearAtom {
            constant,
            coeffs: map,
            rel,
        };
        atom.canonicalize();
        atom
    }

    /// Ground atom `q rel 0`.
    pub fn ground(constant: Rational, rel: Rel) -> Self {
        LinearAtom::new(constant, std::iter::empty(), rel)
    }

    /// Scales by the positive factor that makes every numerator an integer
    /// with overall gcd one. Positive scaling preserves the relation.
    fn canonicalize(&mut self) {
        let mut lcm = BigInt::one();
        let mut gcd = BigInt::zero();
        for q in std::iter::once(&self.constant).chain(self.coeffs.values()) {
            if q.is_zero() {
                continue;
            }
            lcm = lcm.lcm(q.denom());
            gcd = gcd.gcd(q.numer());
        }
        if gcd.is_zero() {
            return; // all-zero atom, keep as is
        }
        let scale = Rational::new(lcm, gcd);
        self.constant *= &scale;
        for c in self.coeffs.values_mut() {
            *c *= &scale;
        }
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn coeffs(&self) -> &BTreeMap<VarId, Rational> {
        &self.coeffs
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_ground(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact evaluation; `None` when some variable is unassigned.
    pub fn eval(&self, alpha: &Assignment) -> Option<bool> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * alpha.get(*v)?;
        }
        Some(self.rel.holds(&acc))
    }

    /// Value of the affine body under a total assignment of its variables.
    pub fn body_value(&self, alpha: &Assignment) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * alpha.get(*v)?;
        }
        Some(acc)
    }
}

impl std::fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        let mut first = true;
        if !self.constant.is_zero() || self.coeffs.is_empty() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (v, c) in &self.coeffs {
            if first {
                write!(f, "{c}·v{}", v.0)?;
                first = false;
            } else {
                write!(f, " + {c}·v{}", v.0)?;
            }
        }
        write!(f, " {} 0)", self.rel.symbol())
    }
}

/// Disjunction of linear atoms, duplicate-free and sorted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearClause {
    atoms: Vec<LinearAtom>,
}

impl LinearClause {
    pub fn new(mut atoms: Vec<LinearAtom>) -> Self {
        assert!(!atoms.is_empty(), "clauses must be non-empty");
        atoms.sort();
        atoms.dedup();
        LinearClause { atoms }
    }

    pub fn unit(atom: LinearAtom) -> Self {
        LinearClause { atoms: vec![atom] }
    }

    pub fn atoms(&self) -> &[LinearAtom] {
        &self.atoms
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.atoms.iter().flat_map(|a| a.vars()).collect()
    }

    /// True if any atom is true, False if all are false, Unknown otherwise.
    pub fn eval(&self, alpha: &Assignment) -> Option<bool> {
        let mut all_false = true;
        for a in &self.atoms {
            match a.eval(alpha) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => all_false = false,
            }
        }
        if all_false {
            Some(false)
        } else {
            None
        }
    }
}

impl std::fmt::Display for LinearClause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(or")?;
        for a in &self.atoms {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// Evaluates a set of clauses: False if any clause is false, True if all are
/// true, Unknown otherwise.
pub fn eval_clauses(clauses: &[LinearClause], alpha: &Assignment) -> Option<bool> {
    let mut all_true = true;
    for c in clauses {
        match c.eval(alpha) {
            Some(false) => return Some(false),
            Some(true) => {}
            None => all_true = false,
        }
    }
    if all_true {
        Some(true)
    } else {
        None
    }
}

/// Expression tree over variables, rational constants and the supported
/// function symbols. Constructors fold constant subterms where the result is
/// an exact rational.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Const(Rational),
    Var(VarId),
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Recip(Box<Term>),
    Pow(Box<Term>, i32),
    Sqrt(Box<Term>),
    Sin(Box<Term>),
    Cos(Box<Term>),
    Exp(Box<Term>),
    Log(Box<Term>),
}

impl Term {
    pub fn constant(q: Rational) -> Term {
        Term::Const(q)
    }

    pub fn var(v: VarId) -> Term {
        Term::Var(v)
    }

    pub fn add(a: Term, b: Term) -> Term {
        if let (Term::Const(x), Term::Const(y)) = (&a, &b) {
            return Term::Const(x + y);
        }
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        if let Term::Const(x) = &a {
            return Term::Const(-x);
        }
        Term::Neg(Box::new(a))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        if let (Term::Const(x), Term::Const(y)) = (&a, &b) {
            return Term::Const(x * y);
        }
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, b: Term) -> Term {
        if let (Term::Const(x), Term::Const(y)) = (&a, &b) {
            if !y.is_zero() {
                return Term::Const(x / y);
            }
        }
        Term::Div(Box::new(a), Box::new(b))
    }

    pub fn recip(a: Term) -> Term {
        if let Term::Const(x) = &a {
            if !x.is_zero() {
                return Term::Const(x.recip());
            }
        }
        Term::Recip(Box::new(a))
    }

    pub fn pow(a: Term, n: i32) -> Term {
        if let Term::Const(x) = &a {
            if n >= 0 {
                return Term::Const(num_traits::pow::Pow::pow(x, n as u64));
            } else if !x.is_zero() {
                return Term::Const(num_traits::pow::Pow::pow(&x.recip(), (-(n as i64)) as u64));
            }
        }
        Term::Pow(Box::new(a), n)
    }

    pub fn sqrt(a: Term) -> Term {
        Term::Sqrt(Box::new(a))
    }

    pub fn sin(a: Term) -> Term {
        Term::Sin(Box::new(a))
    }

    pub fn cos(a: Term) -> Term {
        Term::Cos(Box::new(a))
    }

    pub fn exp(a: Term) -> Term {
        Term::Exp(Box::new(a))
    }

    pub fn log(a: Term) -> Term {
        Term::Log(Box::new(a))
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Add(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Neg(a)
            | Term::Recip(a)
            | Term::Pow(a, _)
            | Term::Sqrt(a)
            | Term::Sin(a)
            | Term::Cos(a)
            | Term::Exp(a)
            | Term::Log(a) => a.collect_vars(out),
        }
    }

    /// True when the term is a polynomial: built only from constants,
    /// variables, `+`, `-`, `*` and non-negative integer powers. Exactly
    /// these terms are decidable by rational evaluation.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Term::Const(_) | Term::Var(_) => true,
            Term::Add(a, b) | Term::Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Term::Neg(a) => a.is_polynomial(),
            Term::Pow(a, n) => *n >= 0 && a.is_polynomial(),
            _ => false,
        }
    }

    /// Exact rational evaluation under a total assignment; `None` when a
    /// variable is unassigned or a division by zero occurs.
    pub fn eval_exact(&self, alpha: &Assignment) -> Option<Rational> {
        match self {
            Term::Const(q) => Some(q.clone()),
            Term::Var(v) => alpha.get(*v).cloned(),
            Term::Add(a, b) => Some(a.eval_exact(alpha)? + b.eval_exact(alpha)?),
            Term::Neg(a) => Some(-a.eval_exact(alpha)?),
            Term::Mul(a, b) => Some(a.eval_exact(alpha)? * b.eval_exact(alpha)?),
            Term::Div(a, b) => {
                let d = b.eval_exact(alpha)?;
                if d.is_zero() {
                    None
                } else {
                    Some(a.eval_exact(alpha)? / d)
                }
            }
            Term::Recip(a) => {
                let d = a.eval_exact(alpha)?;
                if d.is_zero() {
                    None
                } else {
                    Some(d.recip())
                }
            }
            Term::Pow(a, n) => {
                let b = a.eval_exact(alpha)?;
                if *n >= 0 {
                    Some(num_traits::pow::Pow::pow(&b, *n as u64))
                } else if b.is_zero() {
                    None
                } else {
                    Some(num_traits::pow::Pow::pow(&b.recip(), (-(*n as i64)) as u64))
                }
            }
            Term::Sqrt(_) | Term::Sin(_) | Term::Cos(_) | Term::Exp(_) | Term::Log(_) => None,
        }
    }
}

/// Atomic nonlinear constraint `term rel 0` with its variable set recorded at
/// construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NonlinConstraint {
    term: Term,
    rel: NlRel,
    vars: Vec<VarId>,
}

impl NonlinConstraint {
    pub fn new(term: Term, rel: NlRel) -> Self {
        let vars: Vec<VarId> = term.vars().into_iter().collect();
        NonlinConstraint { term, rel, vars }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn rel(&self) -> NlRel {
        self.rel
    }

    /// Sorted variable list, fixed at construction.
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }
}

/// Partial assignment with trail semantics: the order of entries is the
/// order in which values were decided, and any prefix is itself a valid
/// assignment.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    trail: Vec<(VarId, Rational)>,
    index: BTreeMap<VarId, usize>,
}

impl Assignment {
    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Rational)>) -> Self {
        let mut a = Assignment::empty();
        for (v, q) in pairs {
            a.push(v, q);
        }
        a
    }

    pub fn push(&mut self, v: VarId, q: Rational) {
        assert!(
            !self.index.contains_key(&v),
            "variable assigned twice: v{}",
            v.0
        );
        self.index.insert(v, self.trail.len());
        self.trail.push((v, q));
    }

    pub fn get(&self, v: VarId) -> Option<&Rational> {
        self.index.get(&v).map(|&i| &self.trail[i].1)
    }

    pub fn is_assigned(&self, v: VarId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.trail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trail.is_empty()
    }

    pub fn trail(&self) -> &[(VarId, Rational)] {
        &self.trail
    }

    /// The first `len` trail entries as a fresh assignment.
    pub fn prefix(&self, len: usize) -> Assignment {
        Assignment::from_pairs(self.trail[..len.min(self.trail.len())].iter().cloned())
    }

    /// Drops trail entries beyond `len`.
    pub fn truncate(&mut self, len: usize) {
        while self.trail.len() > len {
            let (v, _) = self.trail.pop().unwrap();
            self.index.remove(&v);
        }
    }

    /// Trail position of a variable (0-based), if assigned.
    pub fn position(&self, v: VarId) -> Option<usize> {
        self.index.get(&v).copied()
    }
}

/// Terminal and intermediate solver statuses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Running,
    Sat,
    DeltaSat,
    Unsat,
    ResourceOut,
}

/// The solver state triple: assignment, growing linear clause set and the
/// fixed nonlinear constraint set.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub alpha: Assignment,
    pub linear: Vec<LinearClause>,
    pub nonlinear: Vec<NonlinConstraint>,
    pub status: Status,
}

impl SolverState {
    pub fn initial(linear: Vec<LinearClause>, nonlinear: Vec<NonlinConstraint>) -> Self {
        SolverState {
            alpha: Assignment::empty(),
            linear,
            nonlinear,
            status: Status::Running,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn x() -> VarId {
        VarId(0)
    }
    fn y() -> VarId {
        VarId(1)
    }

    #[test]
    fn eval_atom_examples() {
        // (x - 1 >= 0), x = 2 -> True
        let a = LinearAtom::new(rat(-1, 1), [(x(), rat(1, 1))], Rel::Ge);
        let alpha = Assignment::from_pairs([(x(), rat(2, 1))]);
        assert_eq!(a.eval(&alpha), Some(true));
        // unassigned -> Unknown
        assert_eq!(a.eval(&Assignment::empty()), None);
        // (x/4 + 1 - y <= 0), x = 2, y = 8/3 -> True
        let b = LinearAtom::new(rat(1, 1), [(x(), rat(1, 4)), (y(), rat(-1, 1))], Rel::Le);
        let alpha = Assignment::from_pairs([(x(), rat(2, 1)), (y(), rat(8, 3))]);
        assert_eq!(b.eval(&alpha), Some(true));
    }

    #[test]
    fn eval_clause_examples() {
        // (x <= 1 \/ y >= 2)
        let c = LinearClause::new(vec![
            LinearAtom::new(rat(1, 1), [(x(), rat(-1, 1))], Rel::Ge),
            LinearAtom::new(rat(-2, 1), [(y(), rat(1, 1))], Rel::Ge),
        ]);
        let alpha = Assignment::from_pairs([(x(), rat(0, 1))]);
        assert_eq!(c.eval(&alpha), Some(true));
        let alpha = Assignment::from_pairs([(x(), rat(2, 1))]);
        assert_eq!(c.eval(&alpha), None);
        // (x <= 12/19 \/ y <= 19/12), x = 2, y = 84/55 -> True (84/55 < 19/12)
        let c = LinearClause::new(vec![
            LinearAtom::new(rat(12, 19), [(x(), rat(-1, 1))], Rel::Ge),
            LinearAtom::new(rat(19, 12), [(y(), rat(-1, 1))], Rel::Ge),
        ]);
        let alpha = Assignment::from_pairs([(x(), rat(2, 1)), (y(), rat(84, 55))]);
        assert_eq!(c.eval(&alpha), Some(true));
    }

    #[test]
    fn atom_canonical_scaling() {
        // x/4 + 1 - y <= 0 scales to x + 4 - 4y <= 0
        let a = LinearAtom::new(rat(1, 1), [(x(), rat(1, 4)), (y(), rat(-1, 1))], Rel::Le);
        assert_eq!(a.constant(), &rat(4, 1));
        assert_eq!(a.coeffs()[&x()], rat(1, 1));
        assert_eq!(a.coeffs()[&y()], rat(-4, 1));
        // ground false atoms collapse to a shared canonical form
        let g1 = LinearAtom::ground(rat(-2, 1), Rel::Ge);
        let g2 = LinearAtom::ground(rat(-7, 3), Rel::Ge);
        assert_eq!(g1, g2);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let a = LinearAtom::new(rat(0, 1), [(x(), rat(1, 1)), (y(), rat(0, 1))], Rel::Gt);
        assert_eq!(a.coeffs().len(), 1);
        let b = LinearAtom::new(
            rat(1, 1),
            [(x(), rat(1, 2)), (x(), rat(-1, 2))],
            Rel::Gt,
        );
        assert!(b.is_ground());
    }

    #[test]
    fn constant_folding() {
        let t = Term::mul(Term::constant(rat(2, 1)), Term::constant(rat(3, 4)));
        assert_eq!(t, Term::Const(rat(3, 2)));
        let t = Term::div(Term::constant(rat(1, 1)), Term::constant(rat(0, 1)));
        assert!(matches!(t, Term::Div(_, _)));
        // 0 * x keeps its variable: no algebraic rewriting beyond constants
        let t = Term::mul(Term::constant(rat(0, 1)), Term::var(x()));
        assert_eq!(t.vars().len(), 1);
    }

    #[test]
    fn polynomial_exact_eval() {
        // x^2 + y
        let t = Term::add(Term::pow(Term::var(x()), 2), Term::var(y()));
        assert!(t.is_polynomial());
        let alpha = Assignment::from_pairs([(x(), rat(3, 2)), (y(), rat(1, 4))]);
        assert_eq!(t.eval_exact(&alpha), Some(rat(5, 2)));
        assert!(!Term::sin(Term::var(x())).is_polynomial());
    }

    #[test]
    fn assignment_trail_prefix() {
        let mut a = Assignment::empty();
        a.push(x(), rat(2, 1));
        a.push(y(), rat(8, 3));
        let p = a.prefix(1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.get(x()), Some(&rat(2, 1)));
        assert_eq!(p.get(y()), None);
        a.truncate(1);
        assert_eq!(a, p);
    }
}
