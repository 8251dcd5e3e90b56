//! Rigorous enclosures of the supported transcendental functions over dyadic
//! intervals: argument reduction plus Taylor series with explicit remainder
//! bounds. Point evaluations refine their working precision internally until
//! the enclosure width reaches the requested grid.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;

use crate::num::{pow2, rat, round_half_even, Dyadic, Rational};
use crate::realeval::interval::{DomainErr, DyadicInterval};

fn div_int(iv: &DyadicInterval, n: i64, prec: i64) -> DyadicInterval {
    iv.div(&DyadicInterval::point(Dyadic::from_int(n)), prec)
        .expect("nonzero integer divisor")
}

fn plus_minus(bound: &Dyadic) -> DyadicInterval {
    DyadicInterval::new(bound.abs().neg(), bound.abs())
}

// ---------------------------------------------------------------------------
// Cached constants
// ---------------------------------------------------------------------------

/// Precision bucket so the caches stay small; requests are served by the
/// enclosure computed at the bucket precision, which is at least as tight.
fn bucket(prec: i64) -> i64 {
    ((prec.max(8) + 63) / 64) * 64
}

/// atan(1/m) bounds by alternating series.
fn atan_recip_bounds(m: i64, prec: i64) -> (Rational, Rational) {
    let x = rat(1, m);
    let x2 = &x * &x;
    let thresh = pow2(-(prec + 6));
    let mut power = x.clone(); // x^(2i+1)
    let mut sum = Rational::zero();
    let mut i: i64 = 0;
    loop {
        let term = &power / rat(2 * i + 1, 1);
        if i % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        power *= &x2;
        let next = &power / rat(2 * i + 3, 1);
        if next <= thresh {
            return (&sum - &next, &sum + &next);
        }
        i += 1;
    }
}

/// Enclosure of pi with width at most `2^-prec`.
pub fn pi_interval(prec: i64) -> DyadicInterval {
    static CACHE: OnceLock<Mutex<BTreeMap<i64, DyadicInterval>>> = OnceLock::new();
    let b = bucket(prec);
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&b) {
        return v.clone();
    }
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let (a5l, a5h) = atan_recip_bounds(5, b + 6);
    let (a239l, a239h) = atan_recip_bounds(239, b + 6);
    let lo = rat(16, 1) * a5l - rat(4, 1) * a239h;
    let hi = rat(16, 1) * a5h - rat(4, 1) * a239l;
    let iv = DyadicInterval::from_rational(&lo, b + 4)
        .intersect_hull(&DyadicInterval::from_rational(&hi, b + 4));
    cache.lock().unwrap().insert(b, iv.clone());
    iv
}

/// Enclosure of ln 2 with width at most `2^-prec`.
pub fn ln2_interval(prec: i64) -> DyadicInterval {
    static CACHE: OnceLock<Mutex<BTreeMap<i64, DyadicInterval>>> = OnceLock::new();
    let b = bucket(prec);
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&b) {
        return v.clone();
    }
    // ln 2 = 2 atanh(1/3)
    let x = rat(1, 3);
    let x2 = &x * &x;
    let thresh = pow2(-(b + 6));
    let mut power = x.clone();
    let mut sum = Rational::zero();
    let mut i: i64 = 0;
    loop {
        sum += &power / rat(2 * i + 1, 1);
        power *= &x2;
        let next = &power / rat(2 * i + 3, 1);
        if next <= thresh {
            // remainder of the positive series is at most 2 * next
            let lo = rat(2, 1) * &sum;
            let hi = rat(2, 1) * (&sum + rat(2, 1) * &next);
            let iv = DyadicInterval::from_rational(&lo, b + 4)
                .intersect_hull(&DyadicInterval::from_rational(&hi, b + 4));
            cache.lock().unwrap().insert(b, iv.clone());
            return iv;
        }
        i += 1;
    }
}

impl DyadicInterval {
    /// Hull of two intervals (used to join rational endpoint enclosures).
    pub fn intersect_hull(&self, other: &DyadicInterval) -> DyadicInterval {
        let lo = if self.lo() <= other.lo() {
            self.lo().clone()
        } else {
            other.lo().clone()
        };
        let hi = if self.hi() >= other.hi() {
            self.hi().clone()
        } else {
            other.hi().clone()
        };
        DyadicInterval::new(lo, hi)
    }
}

// ---------------------------------------------------------------------------
// Point evaluations
// ---------------------------------------------------------------------------

/// Enclosure of exp(d) of width at most `2^-prec`.
pub fn exp_point(d: &Dyadic, prec: i64) -> DyadicInterval {
    if d.is_zero() {
        return DyadicInterval::point(Dyadic::one());
    }
    // result magnitude estimate: exp(d) < 2^(1.5 d + 2) for d > 0
    let est: i64 = if d.is_positive() {
        let bound = (d.to_rational() * rat(3, 2)).ceil().to_integer();
        i64::try_from(&bound).unwrap_or(i64::MAX / 4).max(0) + 2
    } else {
        1
    };
    let s = (d.floor_log2_abs() + 2).max(0);
    let r = DyadicInterval::point(d.mul_pow2(-s)); // |r| <= 1/2
    let mut w = prec + 2 * s + est + 32;
    loop {
        let mut sum = DyadicInterval::point(Dyadic::one());
        let mut term = DyadicInterval::point(Dyadic::one());
        let mut i: i64 = 1;
        loop {
            term = div_int(&term.mul(&r), i, w);
            sum = sum.add(&term).round_out(w);
            if term.abs_hi() <= Dyadic::power_of_two(-(w + 2)) {
                // geometric tail with ratio <= 1/2
                sum = sum.add(&plus_minus(&term.abs_hi()));
                break;
            }
            i += 1;
        }
        // clamp: exp is positive
        if sum.lo().is_negative() {
            sum = DyadicInterval::new(Dyadic::zero(), sum.hi().clone());
        }
        for _ in 0..s {
            sum = sum.mul(&sum).round_out(w);
        }
        if sum.width() <= Dyadic::power_of_two(-prec) {
            return sum;
        }
        w *= 2;
    }
}

/// Reduces `d` to `d - 2*pi*m` with the result enclosed in roughly
/// `[-pi - eps, pi + eps]`.
fn reduce_mod_2pi(d: &Dyadic, w: i64) -> DyadicInterval {
    let extra = if d.is_zero() {
        0
    } else {
        d.floor_log2_abs().max(0)
    };
    let pi = pi_interval(w + extra + 16);
    let two_pi_mid = pi.midpoint().to_rational() * rat(2, 1);
    let m = round_half_even(&(d.to_rational() / two_pi_mid));
    if m.is_zero() {
        return DyadicInterval::point(d.clone());
    }
    let two_pi = pi.add(&pi);
    let m_iv = DyadicInterval::point(Dyadic::new(m, 0));
    DyadicInterval::point(d.clone()).sub(&two_pi.mul(&m_iv))
}

fn sin_series(r: &DyadicInterval, w: i64) -> DyadicInterval {
    // sin r = r - r^3/3! + r^5/5! - ... ; |r| <= 4 after reduction
    let r2 = r.mul(r).round_out(w);
    let mut term = r.clone();
    let mut sum = r.clone();
    let mut k: i64 = 1;
    loop {
        term = div_int(&term.mul(&r2), 2 * k * (2 * k + 1), w).neg();
        sum = sum.add(&term).round_out(w);
        // ratio <= 16/((2k+2)(2k+3)) <= 1/2 for k >= 3
        if k >= 3 && term.abs_hi() <= Dyadic::power_of_two(-(w + 2)) {
            sum = sum.add(&plus_minus(&term.abs_hi().mul_pow2(1)));
            break;
        }
        k += 1;
    }
    clamp_unit(sum)
}

fn cos_series(r: &DyadicInterval, w: i64) -> DyadicInterval {
    let r2 = r.mul(r).round_out(w);
    let mut term = DyadicInterval::point(Dyadic::one());
    let mut sum = term.clone();
    let mut k: i64 = 1;
    loop {
        term = div_int(&term.mul(&r2), (2 * k - 1) * (2 * k), w).neg();
        sum = sum.add(&term).round_out(w);
        if k >= 3 && term.abs_hi() <= Dyadic::power_of_two(-(w + 2)) {
            sum = sum.add(&plus_minus(&term.abs_hi().mul_pow2(1)));
            break;
        }
        k += 1;
    }
    clamp_unit(sum)
}

fn clamp_unit(iv: DyadicInterval) -> DyadicInterval {
    let one = Dyadic::one();
    let neg_one = one.neg();
    let lo = if iv.lo() < &neg_one {
        neg_one.clone()
    } else {
        iv.lo().clone()
    };
    let hi = if iv.hi() > &one { one } else { iv.hi().clone() };
    if lo <= hi {
        DyadicInterval::new(lo, hi)
    } else {
        // enclosure entirely outside [-1,1] cannot happen for sin/cos
        DyadicInterval::new(neg_one, Dyadic::one())
    }
}

/// Enclosure of sin(d) of width at most `2^-prec`.
pub fn sin_point(d: &Dyadic, prec: i64) -> DyadicInterval {
    let mut w = prec + 32;
    loop {
        let r = reduce_mod_2pi(d, w);
        let s = sin_series(&r, w);
        if s.width() <= Dyadic::power_of_two(-prec) {
            return s;
        }
        w *= 2;
    }
}

/// Enclosure of cos(d) of width at most `2^-prec`.
pub fn cos_point(d: &Dyadic, prec: i64) -> DyadicInterval {
    let mut w = prec + 32;
    loop {
        let r = reduce_mod_2pi(d, w);
        let s = cos_series(&r, w);
        if s.width() <= Dyadic::power_of_two(-prec) {
            return s;
        }
        w *= 2;
    }
}

/// Enclosure of log(d) of width at most `2^-prec`; requires `d > 0`.
pub fn log_point(d: &Dyadic, prec: i64) -> DyadicInterval {
    assert!(d.is_positive());
    let k = d.floor_log2_abs() + 1; // d * 2^-k in [1/2, 1)
    let mut w = prec + k.abs() + 32;
    loop {
        let a = DyadicInterval::point(d.mul_pow2(-k));
        let one = DyadicInterval::point(Dyadic::one());
        let u = a
            .sub(&one)
            .div(&a.add(&one), w)
            .expect("a + 1 is positive");
        // atanh series: log a = 2 sum u^(2i+1)/(2i+1), |u| <= 1/3
        let u2 = u.mul(&u).round_out(w);
        let mut power = u.clone();
        let mut sum = u.clone();
        let mut i: i64 = 1;
        loop {
            power = power.mul(&u2).round_out(w);
            let term = div_int(&power, 2 * i + 1, w);
            sum = sum.add(&term).round_out(w);
            if power.abs_hi() <= Dyadic::power_of_two(-(w + 2)) {
                sum = sum.add(&plus_minus(&power.abs_hi().mul_pow2(1)));
                break;
            }
            i += 1;
        }
        let log_a = sum.add(&sum); // 2 * sum
        let k_iv = DyadicInterval::point(Dyadic::from_int(k));
        let result = log_a.add(&ln2_interval(w).mul(&k_iv)).round_out(w);
        if result.width() <= Dyadic::power_of_two(-prec) {
            return result;
        }
        w *= 2;
    }
}

// ---------------------------------------------------------------------------
// Interval extensions
// ---------------------------------------------------------------------------

pub fn exp_interval(iv: &DyadicInterval, prec: i64) -> DyadicInterval {
    let lo = exp_point(iv.lo(), prec + 1);
    let hi = exp_point(iv.hi(), prec + 1);
    DyadicInterval::new(lo.lo().clone(), hi.hi().clone())
}

pub fn log_interval(iv: &DyadicInterval, prec: i64) -> Result<DyadicInterval, DomainErr> {
    if !iv.lo().is_positive() {
        return Err(DomainErr::NonPositiveLog);
    }
    let lo = log_point(iv.lo(), prec + 1);
    let hi = log_point(iv.hi(), prec + 1);
    Ok(DyadicInterval::new(lo.lo().clone(), hi.hi().clone()))
}

/// Does some `offset + 2*pi*n` (n integer) land in `[lo, hi]`? Answers true
/// when uncertain; used only to decide whether an extremum is attained, where
/// over-approximation is sound.
fn critical_point_possible(
    lo: &Dyadic,
    hi: &Dyadic,
    offset_times_2: i64, // critical offsets are multiples of pi/2: offset = pi * offset_times_2 / 2
    pi: &DyadicInterval,
) -> bool {
    let pl = pi.lo().to_rational();
    let ph = pi.hi().to_rational();
    let off = rat(offset_times_2, 2);
    // n in [(lo - off*pi) / (2 pi), (hi - off*pi) / (2 pi)] for some pi in [pl, ph]
    let lo_r = lo.to_rational();
    let hi_r = hi.to_rational();
    let cand_lo = [
        (&lo_r - &off * &pl) / (rat(2, 1) * &pl),
        (&lo_r - &off * &ph) / (rat(2, 1) * &ph),
    ];
    let cand_hi = [
        (&hi_r - &off * &pl) / (rat(2, 1) * &pl),
        (&hi_r - &off * &ph) / (rat(2, 1) * &ph),
    ];
    let u = cand_lo.iter().min().unwrap().ceil().to_integer();
    let v = cand_hi.iter().max().unwrap().floor().to_integer();
    u <= v
}

pub fn sin_interval(iv: &DyadicInterval, prec: i64) -> DyadicInterval {
    if iv.width() >= Dyadic::from_int(8) {
        return DyadicInterval::new(Dyadic::one().neg(), Dyadic::one());
    }
    let sa = sin_point(iv.lo(), prec + 1);
    let sb = sin_point(iv.hi(), prec + 1);
    let extra = if iv.abs_hi().is_zero() {
        0
    } else {
        iv.abs_hi().floor_log2_abs().max(0)
    };
    let pi = pi_interval(prec + extra + 16);
    // maxima at pi/2 + 2 pi n, minima at -pi/2 + 2 pi n
    let hi = if critical_point_possible(iv.lo(), iv.hi(), 1, &pi) {
        Dyadic::one()
    } else {
        sa.hi().max(sb.hi()).clone()
    };
    let lo = if critical_point_possible(iv.lo(), iv.hi(), -1, &pi) {
        Dyadic::one().neg()
    } else {
        sa.lo().min(sb.lo()).clone()
    };
    clamp_unit(DyadicInterval::new(lo, hi))
}

pub fn cos_interval(iv: &DyadicInterval, prec: i64) -> DyadicInterval {
    if iv.width() >= Dyadic::from_int(8) {
        return DyadicInterval::new(Dyadic::one().neg(), Dyadic::one());
    }
    let sa = cos_point(iv.lo(), prec + 1);
    let sb = cos_point(iv.hi(), prec + 1);
    let extra = if iv.abs_hi().is_zero() {
        0
    } else {
        iv.abs_hi().floor_log2_abs().max(0)
    };
    let pi = pi_interval(prec + extra + 16);
    // maxima at 2 pi n, minima at pi + 2 pi n
    let hi = if critical_point_possible(iv.lo(), iv.hi(), 0, &pi) {
        Dyadic::one()
    } else {
        sa.hi().max(sb.hi()).clone()
    };
    let lo = if critical_point_possible(iv.lo(), iv.hi(), 2, &pi) {
        Dyadic::one().neg()
    } else {
        sa.lo().min(sb.lo()).clone()
    };
    clamp_unit(DyadicInterval::new(lo, hi))
}
