//! Dyadic interval arithmetic with directed rounding.
//!
//! Addition, subtraction and multiplication are exact; division, roots and
//! the transcendental functions round outward to an absolute precision grid
//! `2^-prec`. Correctness everywhere is the enclosure property, not
//! tightness.

use thiserror::Error;

use crate::num::{rational_ceil_to_grid, rational_floor_to_grid, Dyadic, Rational};

/// Reasons an interval operation can fail to produce an enclosure.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DomainErr {
    #[error("division by an enclosure containing zero")]
    DivByZero,
    #[error("square root of an enclosure entirely below zero")]
    NegativeSqrt,
    #[error("logarithm of an enclosure not strictly positive")]
    NonPositiveLog,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        DyadicInterval { lo, hi }
    }

    pub fn point(d: Dyadic) -> Self {
        DyadicInterval {
            lo: d.clone(),
            hi: d,
        }
    }

    pub fn zero() -> Self {
        DyadicInterval::point(Dyadic::zero())
    }

    /// Smallest grid interval containing the rational `q`.
    pub fn from_rational(q: &Rational, prec: i64) -> Self {
        if let Some(d) = Dyadic::from_rational(q) {
            return DyadicInterval::point(d);
        }
        DyadicInterval::new(rational_floor_to_grid(q, prec), rational_ceil_to_grid(q, prec))
    }

    /// `[q - r, q + r]` rounded outward, for a rational center and dyadic radius.
    pub fn from_center_radius(q: &Rational, radius: &Dyadic, prec: i64) -> Self {
        let r = radius.to_rational();
        DyadicInterval::new(
            rational_floor_to_grid(&(q - &r), prec),
            rational_ceil_to_grid(&(q + &r), prec),
        )
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    /// Exact width `hi - lo`.
    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    /// Exact midpoint (always dyadic).
    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).half()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_zero_point(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// Largest of |lo|, |hi|.
    pub fn abs_hi(&self) -> Dyadic {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn round_out(&self, prec: i64) -> Self {
        DyadicInterval::new(self.lo.floor_to_grid(prec), self.hi.ceil_to_grid(prec))
    }

    pub fn add(&self, o: &Self) -> Self {
        DyadicInterval::new(self.lo.add(&o.lo), self.hi.add(&o.hi))
    }

    pub fn neg(&self) -> Self {
        DyadicInterval::new(self.hi.neg(), self.lo.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Exact product. A zero point on either side short-circuits to zero
    /// without touching the other operand; the evaluator relies on this to
    /// keep constant-valued products query-free.
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero_point() || o.is_zero_point() {
            return DyadicInterval::zero();
        }
        let c1 = self.lo.mul(&o.lo);
        let c2 = self.lo.mul(&o.hi);
        let c3 = self.hi.mul(&o.lo);
        let c4 = self.hi.mul(&o.hi);
        let mut lo = c1.clone();
        let mut hi = c1;
        for c in [c2, c3, c4] {
            if c < lo {
                lo = c.clone();
            }
            if c > hi {
                hi = c;
            }
        }
        DyadicInterval::new(lo, hi)
    }

    pub fn div(&self, o: &Self, prec: i64) -> Result<Self, DomainErr> {
        if o.contains_zero() {
            return Err(DomainErr::DivByZero);
        }
        let a = self.lo.to_rational();
        let b = self.hi.to_rational();
        let c = o.lo.to_rational();
        let d = o.hi.to_rational();
        let quotients = [&a / &c, &a / &d, &b / &c, &b / &d];
        let lo = quotients.iter().min().unwrap();
        let hi = quotients.iter().max().unwrap();
        Ok(DyadicInterval::new(
            rational_floor_to_grid(lo, prec),
            rational_ceil_to_grid(hi, prec),
        ))
    }

    pub fn recip(&self, prec: i64) -> Result<Self, DomainErr> {
        DyadicInterval::point(Dyadic::one()).div(self, prec)
    }

    /// Integer power; negative exponents go through `recip`.
    pub fn pow_int(&self, n: i32, prec: i64) -> Result<Self, DomainErr> {
        if n == 0 {
            return Ok(DyadicInterval::point(Dyadic::one()));
        }
        if n < 0 {
            return self.pow_int(-n, prec)?.recip(prec);
        }
        let n = n as u32;
        if n % 2 == 0 && self.contains_zero() {
            // even power over a straddling interval: [0, max^n]
            let m = self.abs_hi();
            let hi = pow_dyadic(&m, n);
            return Ok(DyadicInterval::new(Dyadic::zero(), hi).round_out(prec));
        }
        let c1 = pow_dyadic(&self.lo, n);
        let c2 = pow_dyadic(&self.hi, n);
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        Ok(DyadicInterval::new(lo, hi).round_out(prec))
    }

    /// `[sqrt(max(lo,0)), sqrt(hi)]`; the clamp is sound because evaluation
    /// presumes the named real lies in the function's domain.
    pub fn sqrt(&self, prec: i64) -> Result<Self, DomainErr> {
        if self.hi.is_negative() {
            return Err(DomainErr::NegativeSqrt);
        }
        let lo = if self.lo.is_negative() {
            Dyadic::zero()
        } else {
            sqrt_dyadic_down(&self.lo, prec)
        };
        let hi = sqrt_dyadic_up(&self.hi, prec);
        Ok(DyadicInterval::new(lo, hi))
    }

    /// Intersection, assuming the intervals overlap.
    pub fn intersect(&self, o: &Self) -> Self {
        let lo = if self.lo >= o.lo {
            self.lo.clone()
        } else {
            o.lo.clone()
        };
        let hi = if self.hi <= o.hi {
            self.hi.clone()
        } else {
            o.hi.clone()
        };
        DyadicInterval::new(lo, hi)
    }
}

impl std::fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn pow_dyadic(d: &Dyadic, n: u32) -> Dyadic {
    let mut acc = Dyadic::one();
    let mut base = d.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        base = base.mul(&base);
        e >>= 1;
    }
    acc
}

/// Largest multiple of `2^-(prec+1)` with square `<= d`. Requires `d >= 0`.
fn sqrt_dyadic_down(d: &Dyadic, prec: i64) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let shift = 2 * (prec + 1);
    let v = d.floor_to_grid(shift);
    // v = m * 2^-shift with m >= 0
    let m = scaled_mantissa(&v, shift);
    let s = m.sqrt();
    Dyadic::new(s, -(prec + 1))
}

/// Smallest multiple of `2^-(prec+1)` with square `>= d`. Requires `d >= 0`.
fn sqrt_dyadic_up(d: &Dyadic, prec: i64) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let shift = 2 * (prec + 1);
    let v = d.ceil_to_grid(shift);
    let m = scaled_mantissa(&v, shift);
    let s = m.sqrt();
    if &s * &s == m {
        Dyadic::new(s, -(prec + 1))
    } else {
        Dyadic::new(s + 1, -(prec + 1))
    }
}

/// Integer `m` with `d = m * 2^-shift`; requires `d` on that grid.
fn scaled_mantissa(d: &Dyadic, shift: i64) -> num_bigint::BigInt {
    let s = d.exponent() + shift;
    debug_assert!(s >= 0);
    d.mantissa() << s as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{pow2, rat};

    fn iv(a: (i64, i64), b: (i64, i64)) -> DyadicInterval {
        DyadicInterval::new(
            Dyadic::from_rational(&rat(a.0, a.1)).unwrap(),
            Dyadic::from_rational(&rat(b.0, b.1)).unwrap(),
        )
    }

    #[test]
    fn mul_signs() {
        let a = iv((-1, 2), (3, 4));
        let b = iv((-2, 1), (5, 1));
        let p = a.mul(&b);
        // min over products: 3/4 * -2 = -3/2; max: 3/4 * 5 = 15/4
        assert_eq!(p.lo().to_rational(), rat(-15, 4));
        assert_eq!(p.hi().to_rational(), rat(15, 4));
    }

    #[test]
    fn mul_zero_shortccircuit() {
        let z = DyadicInterval::zero();
        let huge = iv((-1000, 1), (1000, 1));
        assert!(z.mul(&huge).is_zero_point());
    }

    #[test]
    fn div_enclosure() {
        let one = DyadicInterval::point(Dyadic::one());
        let x = iv((3, 1), (4, 1));
        let q = one.div(&x, 30).unwrap();
        assert!(q.lo().to_rational() <= rat(1, 4) && rat(1, 4) <= q.hi().to_rational());
        assert!(q.lo().to_rational() <= rat(1, 3) && rat(1, 3) <= q.hi().to_rational());
        assert!(q.width().to_rational() <= rat(1, 12) + pow2(-28));
        let bad = iv((-1, 1), (1, 1));
        assert_eq!(one.div(&bad, 30), Err(DomainErr::DivByZero));
    }

    #[test]
    fn sqrt_enclosure() {
        let two = DyadicInterval::point(Dyadic::from_int(2));
        let r = two.sqrt(40).unwrap();
        let lo = r.lo().to_rational();
        let hi = r.hi().to_rational();
        assert!(&lo * &lo <= rat(2, 1));
        assert!(&hi * &hi >= rat(2, 1));
        assert!(hi - lo <= pow2(-38));
        // clamp below zero
        let s = iv((-1, 4), (1, 4)).sqrt(20).unwrap();
        assert!(s.lo().is_zero());
    }

    #[test]
    fn pow_straddle_even() {
        let a = iv((-2, 1), (1, 1));
        let p = a.pow_int(2, 30).unwrap();
        assert_eq!(p.lo().to_rational(), rat(0, 1));
        assert_eq!(p.hi().to_rational(), rat(4, 1));
        let c = a.pow_int(3, 30).unwrap();
        assert_eq!(c.lo().to_rational(), rat(-8, 1));
        assert_eq!(c.hi().to_rational(), rat(1, 1));
    }
}
