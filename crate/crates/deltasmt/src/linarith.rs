//! The linear engine: feasible-interval computation for assignment
//! refinement, simplest-rational value selection, Fourier-Motzkin resolvent
//! generation for conflict resolution, and backjump prefixes.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::num::{rat_int, Rational};
use crate::term::{Assignment, LinearAtom, LinearClause, Rel, VarId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinarithError {
    #[error("variable is already assigned")]
    AlreadyAssigned,
    #[error("precondition violated: linear set not in the required state")]
    Precondition,
    #[error("resolvent construction requires normalized relations")]
    UnsupportedRelation,
}

// ---------------------------------------------------------------------------
// Interval sets over the rationals
// ---------------------------------------------------------------------------

/// Lower endpoint of an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoB {
    NegInf,
    /// open: value excluded
    Gt(Rational),
    /// closed: value included
    Ge(Rational),
}

/// Upper endpoint of an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HiB {
    PosInf,
    Lt(Rational),
    Le(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: LoB,
    pub hi: HiB,
}

impl RatInterval {
    pub fn full() -> Self {
        RatInterval {
            lo: LoB::NegInf,
            hi: HiB::PosInf,
        }
    }

    pub fn point(q: Rational) -> Self {
        RatInterval {
            lo: LoB::Ge(q.clone()),
            hi: HiB::Le(q),
        }
    }

    fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (LoB::NegInf, _) | (_, HiB::PosInf) => false,
            (LoB::Gt(a), HiB::Lt(b)) | (LoB::Gt(a), HiB::Le(b)) | (LoB::Ge(a), HiB::Lt(b)) => {
                a >= b
            }
            (LoB::Ge(a), HiB::Le(b)) => a > b,
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let lo_ok = match &self.lo {
            LoB::NegInf => true,
            LoB::Gt(a) => q > a,
            LoB::Ge(a) => q >= a,
        };
        let hi_ok = match &self.hi {
            HiB::PosInf => true,
            HiB::Lt(b) => q < b,
            HiB::Le(b) => q <= b,
        };
        lo_ok && hi_ok
    }
}

fn lo_max(a: &LoB, b: &LoB) -> LoB {
    match (a, b) {
        (LoB::NegInf, x) | (x, LoB::NegInf) => x.clone(),
        (LoB::Gt(p), LoB::Gt(q)) => LoB::Gt(p.max(q).clone()),
        (LoB::Ge(p), LoB::Ge(q)) => LoB::Ge(p.max(q).clone()),
        (LoB::Gt(p), LoB::Ge(q)) | (LoB::Ge(q), LoB::Gt(p)) => {
            if p >= q {
                LoB::Gt(p.clone())
            } else {
                LoB::Ge(q.clone())
            }
        }
    }
}

fn hi_min(a: &HiB, b: &HiB) -> HiB {
    match (a, b) {
        (HiB::PosInf, x) | (x, HiB::PosInf) => x.clone(),
        (HiB::Lt(p), HiB::Lt(q)) => HiB::Lt(p.min(q).clone()),
        (HiB::Le(p), HiB::Le(q)) => HiB::Le(p.min(q).clone()),
        (HiB::Lt(p), HiB::Le(q)) | (HiB::Le(q), HiB::Lt(p)) => {
            if p <= q {
                HiB::Lt(p.clone())
            } else {
                HiB::Le(q.clone())
            }
        }
    }
}

/// Order key for sweeping: position on the line plus a tiny open/closed bias.
fn lo_key(b: &LoB) -> (Option<&Rational>, u8) {
    match b {
        LoB::NegInf => (None, 0),
        LoB::Ge(q) => (Some(q), 0),
        LoB::Gt(q) => (Some(q), 1),
    }
}

/// Finite union of disjoint, sorted, maximally merged intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<RatInterval>,
}

impl IntervalSet {
    pub fn full() -> Self {
        IntervalSet {
            intervals: vec![RatInterval::full()],
        }
    }

    pub fn empty() -> Self {
        IntervalSet { intervals: vec![] }
    }

    pub fn single(iv: RatInterval) -> Self {
        if iv.is_empty() {
            IntervalSet::empty()
        } else {
            IntervalSet {
                intervals: vec![iv],
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[RatInterval] {
        &self.intervals
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.intervals.iter().any(|iv| iv.contains(q))
    }

    fn normalize(mut raw: Vec<RatInterval>) -> IntervalSet {
        raw.retain(|iv| !iv.is_empty());
        raw.sort_by(|a, b| {
            let (qa, ba) = lo_key(&a.lo);
            let (qb, bb) = lo_key(&b.lo);
            match (qa, qb) {
                (None, None) => ba.cmp(&bb),
                (None, Some(_)) => std::cmp::Ordering::Less,
                (Some(_), None) => std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => x.cmp(y).then(ba.cmp(&bb)),
            }
        });
        let mut out: Vec<RatInterval> = Vec::with_capacity(raw.len());
        for iv in raw {
            if let Some(last) = out.last_mut() {
                if touches_or_overlaps(last, &iv) {
                    last.hi = hi_union(&last.hi, &iv.hi);
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { intervals: out }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.intervals.clone();
        raw.extend(other.intervals.iter().cloned());
        IntervalSet::normalize(raw)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let iv = RatInterval {
                    lo: lo_max(&a.lo, &b.lo),
                    hi: hi_min(&a.hi, &b.hi),
                };
                if !iv.is_empty() {
                    out.push(iv);
                }
            }
        }
        IntervalSet::normalize(out)
    }
}

/// Does `b` start inside or immediately adjacent to `a` (given `a.lo <= b.lo`
/// in sweep order)?
fn touches_or_overlaps(a: &RatInterval, b: &RatInterval) -> bool {
    match (&a.hi, &b.lo) {
        (HiB::PosInf, _) => true,
        (_, LoB::NegInf) => true,
        (HiB::Lt(h), LoB::Gt(l)) => l < h,
        (HiB::Lt(h), LoB::Ge(l)) | (HiB::Le(h), LoB::Gt(l)) | (HiB::Le(h), LoB::Ge(l)) => l <= h,
    }
}

fn hi_union(a: &HiB, b: &HiB) -> HiB {
    match (a, b) {
        (HiB::PosInf, _) | (_, HiB::PosInf) => HiB::PosInf,
        (HiB::Lt(p), HiB::Lt(q)) => HiB::Lt(p.max(q).clone()),
        (HiB::Le(p), HiB::Le(q)) => HiB::Le(p.max(q).clone()),
        (HiB::Lt(p), HiB::Le(q)) | (HiB::Le(q), HiB::Lt(p)) => {
            if q >= p {
                HiB::Le(q.clone())
            } else {
                HiB::Lt(p.clone())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Atom residuals under a partial assignment
// ---------------------------------------------------------------------------

/// How an atom behaves with respect to a focus variable under a partial
/// assignment.
pub enum AtomView {
    Ground(bool),
    /// `coeff * z + shifted rel 0` with every other variable assigned
    Univariate { coeff: Rational, shifted: Rational },
    /// some non-focus variable is unassigned
    OtherUnknown,
}

pub fn atom_view(atom: &LinearAtom, alpha: &Assignment, z: VarId) -> AtomView {
    let mut shifted = atom.constant().clone();
    let mut coeff = rat_int(0);
    for (&v, c) in atom.coeffs() {
        if v == z {
            coeff = c.clone();
        } else {
            match alpha.get(v) {
                Some(q) => shifted += c * q,
                None => return AtomView::OtherUnknown,
            }
        }
    }
    if coeff.is_zero() {
        AtomView::Ground(atom.rel().holds(&shifted))
    } else {
        AtomView::Univariate { coeff, shifted }
    }
}

/// Solution set in `z` of `coeff * z + shifted rel 0`.
fn univariate_solutions(coeff: &Rational, shifted: &Rational, rel: Rel) -> IntervalSet {
    let bound = -(shifted / coeff);
    let rel = if coeff.is_negative() { rel.flipped() } else { rel };
    match rel {
        Rel::Gt => IntervalSet::single(RatInterval {
            lo: LoB::Gt(bound),
            hi: HiB::PosInf,
        }),
        Rel::Ge => IntervalSet::single(RatInterval {
            lo: LoB::Ge(bound),
            hi: HiB::PosInf,
        }),
        Rel::Lt => IntervalSet::single(RatInterval {
            lo: LoB::NegInf,
            hi: HiB::Lt(bound),
        }),
        Rel::Le => IntervalSet::single(RatInterval {
            lo: LoB::NegInf,
            hi: HiB::Le(bound),
        }),
        Rel::Eq => IntervalSet::single(RatInterval::point(bound)),
        Rel::Ne => IntervalSet::normalize(vec![
            RatInterval {
                lo: LoB::NegInf,
                hi: HiB::Lt(bound.clone()),
            },
            RatInterval {
                lo: LoB::Gt(bound),
                hi: HiB::PosInf,
            },
        ]),
    }
}

/// Values of `z` for which the clause is not false under `alpha`, or `None`
/// when the clause cannot become false for any value of `z` (it is satisfied
/// or contains another unknown).
pub fn clause_feasible_values(
    clause: &LinearClause,
    alpha: &Assignment,
    z: VarId,
) -> Option<IntervalSet> {
    let mut acc = IntervalSet::empty();
    for atom in clause.atoms() {
        match atom_view(atom, alpha, z) {
            AtomView::Ground(true) | AtomView::OtherUnknown => return None,
            AtomView::Ground(false) => {}
            AtomView::Univariate { coeff, shifted } => {
                acc = acc.union(&univariate_solutions(&coeff, &shifted, atom.rel()));
            }
        }
    }
    Some(acc)
}

/// Exactly the set `{ q : [[L]]^(alpha, z -> q) != False }`.
pub fn feasible_set(
    linear: &[LinearClause],
    alpha: &Assignment,
    z: VarId,
) -> Result<IntervalSet, LinarithError> {
    if alpha.is_assigned(z) {
        return Err(LinarithError::AlreadyAssigned);
    }
    let mut acc = IntervalSet::full();
    for clause in linear {
        if let Some(vals) = clause_feasible_values(clause, alpha, z) {
            acc = acc.intersect(&vals);
            if acc.is_empty() {
                return Ok(acc);
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Simplest rational selection
// ---------------------------------------------------------------------------

/// Deterministically picks the simplest rational in the set: minimal
/// denominator, then minimal |numerator|, then non-negative preferred.
pub fn pick_value(s: &IntervalSet) -> Option<Rational> {
    s.intervals
        .iter()
        .map(simplest_in_interval)
        .min_by(|a, b| simplicity_key(a).cmp(&simplicity_key(b)))
}

fn simplicity_key(q: &Rational) -> (num_bigint::BigInt, num_bigint::BigInt, bool) {
    (q.denom().clone(), q.numer().abs(), q.is_negative())
}

fn simplest_in_interval(iv: &RatInterval) -> Rational {
    if iv.contains(&rat_int(0)) {
        return rat_int(0);
    }
    // strictly positive or strictly negative interval
    let positive = match &iv.lo {
        LoB::NegInf => false,
        LoB::Gt(q) => !q.is_negative(),
        LoB::Ge(q) => q.is_positive(),
    };
    if positive {
        simplest_positive(&iv.lo, &iv.hi)
    } else {
        -simplest_positive(&negate_hi(&iv.hi), &negate_lo(&iv.lo))
    }
}

fn negate_hi(b: &HiB) -> LoB {
    match b {
        HiB::PosInf => LoB::NegInf,
        HiB::Lt(q) => LoB::Gt(-q),
        HiB::Le(q) => LoB::Ge(-q),
    }
}

fn negate_lo(b: &LoB) -> HiB {
    match b {
        LoB::NegInf => HiB::PosInf,
        LoB::Gt(q) => HiB::Lt(-q),
        LoB::Ge(q) => HiB::Le(-q),
    }
}

/// Simplest rational in a non-empty interval contained in `(0, oo)`:
/// Stern-Brocot / continued-fraction descent.
fn simplest_positive(lo: &LoB, hi: &HiB) -> Rational {
    // smallest admissible integer
    let n = match lo {
        LoB::NegInf => rat_int(1),
        LoB::Gt(q) => Rational::from_integer(q.floor().to_integer() + 1),
        LoB::Ge(q) => Rational::from_integer(q.ceil().to_integer()),
    };
    let n = if n.is_positive() { n } else { rat_int(1) };
    let admissible = match hi {
        HiB::PosInf => true,
        HiB::Lt(q) => &n < q,
        HiB::Le(q) => &n <= q,
    };
    if admissible {
        return n;
    }
    // interval within (m, m+1): recurse on the reciprocal of the fractional part
    let m = &n - rat_int(1);
    let inner_lo = match hi {
        HiB::PosInf => unreachable!("unbounded interval admits an integer"),
        HiB::Lt(q) => LoB::Gt((q - &m).recip()),
        HiB::Le(q) => LoB::Ge((q - &m).recip()),
    };
    let inner_hi = match lo {
        LoB::NegInf => HiB::PosInf,
        LoB::Gt(q) => {
            if q <= &m {
                HiB::PosInf
            } else {
                HiB::Lt((q - &m).recip())
            }
        }
        LoB::Ge(q) => HiB::Le((q - &m).recip()),
    };
    &m + simplest_positive(&inner_lo, &inner_hi).recip()
}

// ---------------------------------------------------------------------------
// Resolvents (rule R)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BoundKind {
    Lower,
    Upper,
}

/// A bound on the focus variable induced by one clause atom, together with
/// the clause's remaining (false) atoms.
#[derive(Clone, Debug)]
pub struct ImpliedBound {
    kind: BoundKind,
    value: Rational,
    strict: bool,
    atom: LinearAtom,
    source: usize,
}

impl ImpliedBound {
    /// Index of the clause this bound was propagated from.
    pub fn source(&self) -> usize {
        self.source
    }
}

struct ConstrainingClause {
    residue: Vec<LinearAtom>,
    z_atoms: Vec<ImpliedBound>,
}

fn classify_bound(
    atom: &LinearAtom,
    coeff: &Rational,
    shifted: &Rational,
    source: usize,
) -> Result<ImpliedBound, LinarithError> {
    let value = -(shifted / coeff);
    let (kind, strict) = match (atom.rel(), coeff.is_positive()) {
        (Rel::Gt, true) => (BoundKind::Lower, true),
        (Rel::Ge, true) => (BoundKind::Lower, false),
        (Rel::Gt, false) => (BoundKind::Upper, true),
        (Rel::Ge, false) => (BoundKind::Upper, false),
        (Rel::Lt, true) => (BoundKind::Upper, true),
        (Rel::Le, true) => (BoundKind::Upper, false),
        (Rel::Lt, false) => (BoundKind::Lower, true),
        (Rel::Le, false) => (BoundKind::Lower, false),
        _ => return Err(LinarithError::UnsupportedRelation),
    };
    Ok(ImpliedBound {
        kind,
        value,
        strict,
        atom: atom.clone(),
        source,
    })
}

fn bounds_conflict(lower: &ImpliedBound, upper: &ImpliedBound) -> bool {
    debug_assert!(lower.kind == BoundKind::Lower && upper.kind == BoundKind::Upper);
    match lower.value.cmp(&upper.value) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => lower.strict || upper.strict,
        std::cmp::Ordering::Less => false,
    }
}

/// Eliminates the focus variable from a (lower, upper) atom pair by the
/// positive combination that cancels its coefficient. Strictness combines as
/// strict if either side is strict.
fn fm_combine(lower: &LinearAtom, upper: &LinearAtom, z: VarId) -> LinearAtom {
    let cl = lower.coeffs()[&z].clone();
    let cu = upper.coeffs()[&z].clone();
    debug_assert!(cl.is_positive() && cu.is_negative() || cl.is_negative() && cu.is_positive());
    // scale lower by |cu| and upper by |cl|
    let (sl, su) = (cu.abs(), cl.abs());
    let mut coeffs: std::collections::BTreeMap<VarId, Rational> = Default::default();
    for (&v, c) in lower.coeffs() {
        *coeffs.entry(v).or_insert_with(|| rat_int(0)) += c * &sl;
    }
    for (&v, c) in upper.coeffs() {
        *coeffs.entry(v).or_insert_with(|| rat_int(0)) += c * &su;
    }
    coeffs.remove(&z);
    let constant = lower.constant() * &sl + upper.constant() * &su;
    let strict = lower.rel() == Rel::Gt || upper.rel() == Rel::Gt || lower.rel() == Rel::Lt
        || upper.rel() == Rel::Lt;
    let rel = if strict { Rel::Gt } else { Rel::Ge };
    LinearAtom::new(constant, coeffs, rel)
}

/// Normalizes an atom's relation into `{>, >=}` by flipping signs if needed,
/// so Fourier-Motzkin combination only sees positive-form inequalities.
fn positive_form(atom: &LinearAtom) -> Result<LinearAtom, LinarithError> {
    match atom.rel() {
        Rel::Gt | Rel::Ge => Ok(atom.clone()),
        Rel::Lt | Rel::Le => {
            let rel = if atom.rel() == Rel::Lt { Rel::Gt } else { Rel::Ge };
            Ok(LinearAtom::new(
                -atom.constant().clone(),
                atom.coeffs().iter().map(|(&v, c)| (v, -c.clone())),
                rel,
            ))
        }
        _ => Err(LinarithError::UnsupportedRelation),
    }
}

/// Computes a resolvent on `z`: a set of z-free clauses implied by `linear`
/// and false under `alpha`. Requires `feasible_set(linear, alpha, z)` empty.
///
/// The primary construction pairs conflicting implied bounds from clauses
/// whose atoms are all false except a single one univariate in `z`. When no
/// such pair exists (the conflict runs through clauses with several z-atoms)
/// a single hyper-resolvent is emitted instead: the residues of every
/// constraining clause plus the combined atom of every conflicting
/// cross-clause bound pair.
pub fn resolvent(
    linear: &[LinearClause],
    alpha: &Assignment,
    z: VarId,
) -> Result<Vec<LinearClause>, LinarithError> {
    let mut constraining: Vec<ConstrainingClause> = Vec::new();
    for (idx, clause) in linear.iter().enumerate() {
        let mut residue = Vec::new();
        let mut z_atoms = Vec::new();
        let mut skip = false;
        for atom in clause.atoms() {
            match atom_view(atom, alpha, z) {
                AtomView::Ground(true) | AtomView::OtherUnknown => {
                    skip = true;
                    break;
                }
                AtomView::Ground(false) => residue.push(atom.clone()),
                AtomView::Univariate { coeff, shifted } => {
                    z_atoms.push(classify_bound(atom, &coeff, &shifted, idx)?);
                }
            }
        }
        if !skip && !z_atoms.is_empty() {
            constraining.push(ConstrainingClause { residue, z_atoms });
        }
    }

    // primary: pairwise combinations of unit implied bounds
    let units: Vec<(&ConstrainingClause, &ImpliedBound)> = constraining
        .iter()
        .filter(|c| c.z_atoms.len() == 1)
        .map(|c| (c, &c.z_atoms[0]))
        .collect();
    let mut clauses: Vec<LinearClause> = Vec::new();
    for (cl, bl) in units.iter().filter(|(_, b)| b.kind == BoundKind::Lower) {
        for (cu, bu) in units.iter().filter(|(_, b)| b.kind == BoundKind::Upper) {
            if !bounds_conflict(bl, bu) {
                continue;
            }
            let mut atoms = cl.residue.clone();
            atoms.extend(cu.residue.clone());
            atoms.push(fm_combine(
                &positive_form(&bl.atom)?,
                &positive_form(&bu.atom)?,
                z,
            ));
            let clause = LinearClause::new(atoms);
            debug_assert_eq!(clause.eval(alpha), Some(false));
            if !clauses.contains(&clause) {
                clauses.push(clause);
            }
        }
    }
    if !clauses.is_empty() {
        return Ok(clauses);
    }

    // fallback: one hyper-resolvent over all constraining clauses
    let mut atoms: Vec<LinearAtom> = Vec::new();
    for c in &constraining {
        atoms.extend(c.residue.clone());
    }
    let mut found_pair = false;
    for (i, ci) in constraining.iter().enumerate() {
        for bl in ci.z_atoms.iter().filter(|b| b.kind == BoundKind::Lower) {
            for (j, cj) in constraining.iter().enumerate() {
                if i == j {
                    continue;
                }
                for bu in cj.z_atoms.iter().filter(|b| b.kind == BoundKind::Upper) {
                    if bounds_conflict(bl, bu) {
                        found_pair = true;
                        atoms.push(fm_combine(
                            &positive_form(&bl.atom)?,
                            &positive_form(&bu.atom)?,
                            z,
                        ));
                    }
                }
            }
        }
    }
    if !found_pair {
        return Err(LinarithError::Precondition);
    }
    let clause = LinearClause::new(atoms);
    debug_assert_eq!(clause.eval(alpha), Some(false));
    Ok(vec![clause])
}

// ---------------------------------------------------------------------------
// Backjumping (rule B)
// ---------------------------------------------------------------------------

/// Smallest prefix length at which the clause set evaluates to false, or
/// `None` when it is not false under `alpha`. A result of 0 means a ground
/// contradiction is present.
pub fn falsified_at(linear: &[LinearClause], alpha: &Assignment) -> Option<usize> {
    let mut best: Option<usize> = None;
    for clause in linear {
        if clause.eval(alpha) != Some(false) {
            continue;
        }
        // the clause becomes false once all atoms are decided
        let mut t = 0usize;
        for atom in clause.atoms() {
            for v in atom.vars() {
                let pos = alpha.position(v).expect("false clause fully assigned") + 1;
                t = t.max(pos);
            }
        }
        best = Some(best.map_or(t, |b: usize| b.min(t)));
        if best == Some(0) {
            break;
        }
    }
    best
}

/// The longest trail prefix under which the clause set is not false; empty
/// when even the empty prefix is false (the caller then fires the final
/// unsat rule).
pub fn backjump_prefix(
    linear: &[LinearClause],
    alpha: &Assignment,
) -> Result<Assignment, LinarithError> {
    match falsified_at(linear, alpha) {
        None => Err(LinarithError::Precondition),
        Some(t) => Ok(alpha.prefix(t.saturating_sub(1))),
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

    fn unit_ge(v: VarId, bound: (i64, i64)) -> LinearClause {
        // v >= bound
        LinearClause::unit(LinearAtom::new(
            -rat(bound.0, bound.1),
            [(v, rat(1, 1))],
            Rel::Ge,
        ))
    }

    fn unit_le(v: VarId, bound: (i64, i64)) -> LinearClause {
        LinearClause::unit(LinearAtom::new(
            rat(bound.0, bound.1),
            [(v, rat(-1, 1))],
            Rel::Ge,
        ))
    }

    #[test]
    fn feasible_set_examples() {
        // {x >= 1, x <= 3} -> [1, 3]
        let lin = vec![unit_ge(x(), (1, 1)), unit_le(x(), (3, 1))];
        let s = feasible_set(&lin, &Assignment::empty(), x()).unwrap();
        assert!(s.contains(&rat(1, 1)) && s.contains(&rat(3, 1)) && s.contains(&rat(2, 1)));
        assert!(!s.contains(&rat(7, 2)) && !s.contains(&rat(1, 2)));
        // {x > 1, x < 1} -> empty
        let lin = vec![
            LinearClause::unit(LinearAtom::new(rat(-1, 1), [(x(), rat(1, 1))], Rel::Gt)),
            LinearClause::unit(LinearAtom::new(rat(1, 1), [(x(), rat(-1, 1))], Rel::Gt)),
        ];
        assert!(feasible_set(&lin, &Assignment::empty(), x()).unwrap().is_empty());
        // {x >= 1, (x <= 0 \/ y >= 5)}, y = 0 -> empty
        let lin = vec![
            unit_ge(x(), (1, 1)),
            LinearClause::new(vec![
                LinearAtom::new(rat(0, 1), [(x(), rat(-1, 1))], Rel::Ge),
                LinearAtom::new(rat(-5, 1), [(y(), rat(1, 1))], Rel::Ge),
            ]),
        ];
        let alpha = Assignment::from_pairs([(y(), rat(0, 1))]);
        assert!(feasible_set(&lin, &alpha, x()).unwrap().is_empty());
        // already assigned is an error
        assert_eq!(
            feasible_set(&lin, &alpha, y()),
            Err(LinarithError::AlreadyAssigned)
        );
    }

    #[test]
    fn pick_value_examples() {
        // (0, 1) -> 1/2
        let s = IntervalSet::single(RatInterval {
            lo: LoB::Gt(rat(0, 1)),
            hi: HiB::Lt(rat(1, 1)),
        });
        assert_eq!(pick_value(&s), Some(rat(1, 2)));
        // [1, 3] -> 1
        let s = IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(1, 1)),
            hi: HiB::Le(rat(3, 1)),
        });
        assert_eq!(pick_value(&s), Some(rat(1, 1)));
        // singleton
        let s = IntervalSet::single(RatInterval::point(rat(2, 3)));
        assert_eq!(pick_value(&s), Some(rat(2, 3)));
        // sign preference on ties
        let s = IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(-1, 2)),
            hi: HiB::Le(rat(-1, 3)),
        })
        .union(&IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(1, 3)),
            hi: HiB::Le(rat(1, 2)),
        }));
        assert_eq!(pick_value(&s), Some(rat(1, 2)));
        // empty
        assert_eq!(pick_value(&IntervalSet::empty()), None);
        // [4/3, 5/3] -> 3/2
        let s = IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(4, 3)),
            hi: HiB::Le(rat(5, 3)),
        });
        assert_eq!(pick_value(&s), Some(rat(3, 2)));
    }

    #[test]
    fn resolvent_trivial_contradiction() {
        // units x >= 3 and x <= 1 -> ground contradiction clause
        let lin = vec![unit_ge(x(), (3, 1)), unit_le(x(), (1, 1))];
        let alpha = Assignment::empty();
        let rs = resolvent(&lin, &alpha, x()).unwrap();
        assert_eq!(rs.len(), 1);
        let c = &rs[0];
        assert_eq!(c.atoms().len(), 1);
        assert!(c.atoms()[0].is_ground());
        assert_eq!(c.eval(&alpha), Some(false));
    }

    #[test]
    fn resolvent_eliminates_via_other_variable() {
        // units x >= 3, x <= y with y = 1 -> {y >= 3}, false under alpha
        let lin = vec![
            unit_ge(x(), (3, 1)),
            LinearClause::unit(LinearAtom::new(
                rat(0, 1),
                [(x(), rat(-1, 1)), (y(), rat(1, 1))],
                Rel::Ge,
            )),
        ];
        let alpha = Assignment::from_pairs([(y(), rat(1, 1))]);
        let rs = resolvent(&lin, &alpha, x()).unwrap();
        assert_eq!(rs.len(), 1);
        let expected = LinearClause::unit(LinearAtom::new(rat(-3, 1), [(y(), rat(1, 1))], Rel::Ge));
        assert_eq!(rs[0], expected);
        assert_eq!(rs[0].eval(&alpha), Some(false));
    }

    #[test]
    fn resolvent_keeps_residue_atoms() {
        // (a \/ x >= 3), (b \/ x <= 1) with a, b false: (a \/ b \/ ground-false)
        let a_atom = LinearAtom::new(rat(-10, 1), [(y(), rat(1, 1))], Rel::Ge); // y >= 10
        let b_atom = LinearAtom::new(rat(-20, 1), [(y(), rat(1, 1))], Rel::Ge); // y >= 20
        let lin = vec![
            LinearClause::new(vec![
                a_atom.clone(),
                LinearAtom::new(rat(-3, 1), [(x(), rat(1, 1))], Rel::Ge),
            ]),
            LinearClause::new(vec![
                b_atom.clone(),
                LinearAtom::new(rat(1, 1), [(x(), rat(-1, 1))], Rel::Ge),
            ]),
        ];
        let alpha = Assignment::from_pairs([(y(), rat(0, 1))]);
        let rs = resolvent(&lin, &alpha, x()).unwrap();
        assert_eq!(rs.len(), 1);
        let atoms = rs[0].atoms();
        assert!(atoms.contains(&a_atom));
        assert!(atoms.contains(&b_atom));
        assert!(atoms.iter().any(|a| a.is_ground()));
        assert_eq!(rs[0].eval(&alpha), Some(false));
    }

    #[test]
    fn resolvent_hyper_fallback() {
        // (x <= 220/223 \/ x <= 3/55) has two upper atoms; with the unit
        // x >= 4/3 the pairwise scheme finds nothing and the fallback fires.
        let co = LinearClause::new(vec![
            LinearAtom::new(rat(220, 223), [(x(), rat(-1, 1))], Rel::Ge),
            LinearAtom::new(rat(3, 55), [(x(), rat(-1, 1))], Rel::Ge),
        ]);
        let lin = vec![unit_ge(x(), (4, 3)), co];
        let alpha = Assignment::empty();
        assert!(feasible_set(&lin, &alpha, x()).unwrap().is_empty());
        let rs = resolvent(&lin, &alpha, x()).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].eval(&alpha), Some(false));
        assert!(rs[0].vars().is_empty(), "resolvent must not mention x");
    }

    #[test]
    fn backjump_examples() {
        // clause false at (x, y) but not at x alone
        let clause = LinearClause::new(vec![
            LinearAtom::new(rat(12, 19), [(x(), rat(-1, 1))], Rel::Ge),
            LinearAtom::new(rat(19, 12), [(y(), rat(-1, 1))], Rel::Ge),
        ]);
        let alpha = Assignment::from_pairs([(x(), rat(2, 1)), (y(), rat(8, 3))]);
        let lin = vec![clause];
        let gamma = backjump_prefix(&lin, &alpha).unwrap();
        assert_eq!(gamma.len(), 1);
        assert_eq!(gamma.get(x()), Some(&rat(2, 1)));
        // ground contradiction: empty prefix
        let lin = vec![LinearClause::unit(LinearAtom::ground(rat(-1, 1), Rel::Ge))];
        let gamma = backjump_prefix(&lin, &alpha).unwrap();
        assert!(gamma.is_empty());
        // not false: precondition error
        let lin = vec![unit_ge(x(), (1, 1))];
        assert!(backjump_prefix(&lin, &alpha).is_err());
    }

    #[test]
    fn interval_set_algebra() {
        let a = IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(0, 1)),
            hi: HiB::Le(rat(2, 1)),
        });
        let b = IntervalSet::single(RatInterval {
            lo: LoB::Gt(rat(1, 1)),
            hi: HiB::PosInf,
        });
        let i = a.intersect(&b);
        assert!(i.contains(&rat(3, 2)) && !i.contains(&rat(1, 1)) && !i.contains(&rat(5, 2)));
        // touching closed/open merge
        let c = IntervalSet::single(RatInterval {
            lo: LoB::Ge(rat(2, 1)),
            hi: HiB::Le(rat(3, 1)),
        });
        let u = a.union(&c);
        assert_eq!(u.intervals().len(), 1);
        // punctured line from a Ne atom
        let s = univariate_solutions(&rat(1, 1), &rat(-1, 1), Rel::Ne);
        assert!(!s.contains(&rat(1, 1)) && s.contains(&rat(0, 1)) && s.contains(&rat(2, 1)));
    }
}
