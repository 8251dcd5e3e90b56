//! Exact arbitrary-precision numerics: rationals, integer logs and dyadics.
//!
//! Every numeric result the solver reports is derived from exact rational or
//! dyadic arithmetic; there is no floating-point fast path anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// 2^e as a rational, for any sign of `e`.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Largest `e` with `2^e <= q`. Requires `q > 0`.
pub fn floor_log2(q: &Rational) -> i64 {
    assert!(q.is_positive(), "floor_log2 requires a positive argument");
    let n = q.numer();
    let d = q.denom();
    let mut e = n.bits() as i64 - d.bits() as i64;
    while pow2_cmp(q, e) == std::cmp::Ordering::Less {
        e -= 1;
    }
    while pow2_cmp(q, e + 1) != std::cmp::Ordering::Less {
        e += 1;
    }
    e
}

/// Smallest `e` with `q <= 2^e`. Requires `q > 0`.
pub fn ceil_log2(q: &Rational) -> i64 {
    let f = floor_log2(q);
    if pow2_cmp(q, f) == std::cmp::Ordering::Equal {
        f
    } else {
        f + 1
    }
}

/// Compares `q` with `2^e` without constructing huge rationals.
fn pow2_cmp(q: &Rational, e: i64) -> std::cmp::Ordering {
    // q ? 2^e  <=>  numer ? denom * 2^e
    let n = q.numer();
    let d = q.denom();
    if e >= 0 {
        n.cmp(&(d << e as usize))
    } else {
        (n << (-e) as usize).cmp(d)
    }
}

/// Nearest integer to `q`, ties to even.
pub fn round_half_even(q: &Rational) -> BigInt {
    let f = q.floor().to_integer();
    let frac = q - BigRational::from_integer(f.clone());
    let half = rat(1, 2);
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => f,
        std::cmp::Ordering::Greater => f + 1,
        std::cmp::Ordering::Equal => {
            if f.is_even() {
                f
            } else {
                f + 1
            }
        }
    }
}

/// A dyadic rational `mant * 2^exp` in canonical form: `mant` odd or zero,
/// and `exp = 0` when `mant = 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic {
                mant,
                exp: 0,
            };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            Dyadic {
                mant: mant >> tz as usize,
                exp: exp + tz as i64,
            }
        } else {
            Dyadic { mant, exp }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// 2^e.
    pub fn power_of_two(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Exact conversion when the denominator is a power of two.
    pub fn from_rational(q: &Rational) -> Option<Self> {
        let d = q.denom();
        if d.is_one() {
            return Some(Dyadic::new(q.numer().clone(), 0));
        }
        // power of two iff a single set bit
        let bits = d.bits();
        if d.trailing_zeros() == Some(bits - 1) {
            Some(Dyadic::new(q.numer().clone(), -((bits - 1) as i64)))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: if self.mant.is_zero() { 0 } else { self.exp },
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            self.clone()
        } else {
            Dyadic {
                mant: self.mant.clone(),
                exp: self.exp + e,
            }
        }
    }

    /// Exact halving (always representable).
    pub fn half(&self) -> Self {
        self.mul_pow2(-1)
    }

    /// Largest `e` with `2^e <= |self|`; requires nonzero.
    pub fn floor_log2_abs(&self) -> i64 {
        assert!(!self.is_zero());
        self.mant.bits() as i64 - 1 + self.exp
    }

    /// Largest multiple of `2^-prec` that is `<= self`.
    pub fn floor_to_grid(&self, prec: i64) -> Self {
        let s = self.exp + prec;
        if self.is_zero() || s >= 0 {
            return self.clone();
        }
        Dyadic::new(&self.mant >> (-s) as usize, -prec)
    }

    /// Smallest multiple of `2^-prec` that is `>= self`.
    pub fn ceil_to_grid(&self, prec: i64) -> Self {
        self.neg().floor_to_grid(prec).neg()
    }

    /// Nearest multiple of `2^-prec`, ties to even mantissa.
    pub fn round_to_grid(&self, prec: i64) -> Self {
        let s = self.exp + prec;
        if self.is_zero() || s >= 0 {
            return self.clone();
        }
        let shift = (-s) as usize;
        let q: BigInt = &self.mant >> shift;
        let rem = &self.mant - (&q << shift);
        let half: BigInt = BigInt::one() << (shift - 1);
        let q = match rem.cmp(&half) {
            std::cmp::Ordering::Less => q,
            std::cmp::Ordering::Greater => q + 1,
            std::cmp::Ordering::Equal => {
                if q.is_even() {
                    q
                } else {
                    q + 1
                }
            }
        };
        Dyadic::new(q, -prec)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self.mant.sign(), other.mant.sign()) {
            (num_bigint::Sign::Minus, num_bigint::Sign::NoSign | num_bigint::Sign::Plus) => {
                return Ordering::Less
            }
            (num_bigint::Sign::NoSign | num_bigint::Sign::Plus, num_bigint::Sign::Minus) => {
                return Ordering::Greater
            }
            (num_bigint::Sign::NoSign, num_bigint::Sign::NoSign) => return Ordering::Equal,
            (num_bigint::Sign::NoSign, num_bigint::Sign::Plus) => return Ordering::Less,
            (num_bigint::Sign::Plus, num_bigint::Sign::NoSign) => return Ordering::Greater,
            _ => {}
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl std::fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl std::fmt::Display for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

/// floor(q * 2^prec) / 2^prec as a dyadic.
pub fn rational_floor_to_grid(q: &Rational, prec: i64) -> Dyadic {
    let scaled = q * pow2(prec);
    Dyadic::new(scaled.floor().to_integer(), -prec)
}

/// ceil(q * 2^prec) / 2^prec as a dyadic.
pub fn rational_ceil_to_grid(q: &Rational, prec: i64) -> Dyadic {
    let scaled = q * pow2(prec);
    Dyadic::new(scaled.ceil().to_integer(), -prec)
}

/// round(q * 2^prec) / 2^prec as a dyadic, ties to even.
pub fn rational_round_to_grid(q: &Rational, prec: i64) -> Dyadic {
    let scaled = q * pow2(prec);
    Dyadic::new(round_half_even(&scaled), -prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn floor_log2_basics() {
        assert_eq!(floor_log2(&rat(1, 1)), 0);
        assert_eq!(floor_log2(&rat(1, 4)), -2);
        assert_eq!(floor_log2(&rat(1, 40)), -6);
        assert_eq!(floor_log2(&rat(3, 1)), 1);
        assert_eq!(floor_log2(&rat(4, 1)), 2);
        assert_eq!(ceil_log2(&rat(1, 2)), -1);
        assert_eq!(ceil_log2(&rat(3, 1)), 2);
        assert_eq!(ceil_log2(&rat(4, 1)), 2);
    }

    #[test]
    fn round_half_even_ties() {
        assert_eq!(round_half_even(&rat(4, 3)), BigInt::from(1));
        assert_eq!(round_half_even(&rat(-4, 3)), BigInt::from(-1));
        assert_eq!(round_half_even(&rat(1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&rat(3, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&rat(-1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&rat(5, 1)), BigInt::from(5));
    }

    #[test]
    fn dyadic_canonical_form() {
        let d = Dyadic::new(BigInt::from(12), -2);
        assert_eq!(d.mantissa(), &BigInt::from(3));
        assert_eq!(d.exponent(), 0);
        let z = Dyadic::new(BigInt::zero(), 5);
        assert!(z.is_zero());
        assert_eq!(z.exponent(), 0);
    }

    #[test]
    fn dyadic_grid_rounding() {
        // 5/8 on the quarter grid
        let d = Dyadic::new(BigInt::from(5), -3);
        assert_eq!(d.floor_to_grid(2).to_rational(), rat(1, 2));
        assert_eq!(d.ceil_to_grid(2).to_rational(), rat(3, 4));
        // tie: 5/8 * 4 = 2.5 -> even -> 2 -> 1/2
        assert_eq!(d.round_to_grid(2).to_rational(), rat(1, 2));
        let n = d.neg();
        assert_eq!(n.floor_to_grid(2).to_rational(), rat(-3, 4));
        assert_eq!(n.ceil_to_grid(2).to_rational(), rat(-1, 2));
    }

    proptest! {
        #[test]
        fn dyadic_rational_roundtrip(m in -10_000i64..10_000, e in -40i64..40) {
            let d = Dyadic::new(BigInt::from(m), e);
            let back = Dyadic::from_rational(&d.to_rational()).unwrap();
            prop_assert_eq!(d, back);
        }

        #[test]
        fn dyadic_arith_matches_rational(a in -500i64..500, ea in -10i64..10,
                                         b in -500i64..500, eb in -10i64..10) {
            let x = Dyadic::new(BigInt::from(a), ea);
            let y = Dyadic::new(BigInt::from(b), eb);
            prop_assert_eq!(x.add(&y).to_rational(), x.to_rational() + y.to_rational());
            prop_assert_eq!(x.sub(&y).to_rational(), x.to_rational() - y.to_rational());
            prop_assert_eq!(x.mul(&y).to_rational(), x.to_rational() * y.to_rational());
            prop_assert_eq!(x.cmp(&y), x.to_rational().cmp(&y.to_rational()));
        }

        #[test]
        fn grid_bounds(m in -100_000i64..100_000, e in -30i64..5, prec in 0i64..20) {
            let d = Dyadic::new(BigInt::from(m), e);
            let lo = d.floor_to_grid(prec);
            let hi = d.ceil_to_grid(prec);
            prop_assert!(lo <= d && d <= hi);
            prop_assert!(hi.sub(&lo).to_rational() <= pow2(-prec));
        }
    }
}
