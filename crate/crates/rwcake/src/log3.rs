//! Certified base-3 logarithms.
//!
//! Comparisons against `log3` values must be exact, so this module never
//! touches floating point. It brackets `log3(x)` between two rationals by
//! binary digit extraction with interval fixed-point squaring, refining the
//! precision until a comparison is decided. Rationals that are exact powers
//! of three short-circuit to exact results, which is what makes every
//! comparison terminate: for any other rational input `log3` is irrational.

use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::cmp::Ordering;

/// `lo <= log3(x) <= hi`; `lo == hi` only for exact powers of three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Log3Bounds {
    pub lo: Rational,
    pub hi: Rational,
}

impl Log3Bounds {
    fn exact(v: Rational) -> Self {
        Log3Bounds { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &Log3Bounds) -> Log3Bounds {
        Log3Bounds { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Scale by a nonnegative rational.
    pub fn scale(&self, c: &Rational) -> Log3Bounds {
        assert!(!c.is_negative());
        Log3Bounds { lo: c * &self.lo, hi: c * &self.hi }
    }
}

/// If `x == 3^k` for integer `k` (including negative `k`), return `k`.
pub fn power_of_three_exponent(x: &Rational) -> Option<i64> {
    if x.is_zero() || x.is_negative() {
        return None;
    }
    let (num, den) = (x.numer(), x.denom());
    let one = BigInt::one();
    if den == &one {
        int_power_of_three(num).map(|k| k as i64)
    } else if num == &one {
        int_power_of_three(den).map(|k| -(k as i64))
    } else {
        None
    }
}

fn int_power_of_three(m: &BigInt) -> Option<u64> {
    let three = BigInt::from(3);
    let mut v = m.clone();
    let mut k = 0u64;
    while v > BigInt::one() {
        let (q, r) = v.div_rem(&three);
        if !r.is_zero() {
            return None;
        }
        v = q;
        k += 1;
    }
    if v == BigInt::one() {
        Some(k)
    } else {
        None
    }
}

/// Largest `t >= 0` with `3^t <= m`, for `m >= 1`.
fn floor_log3_int(m: &BigInt) -> u64 {
    let three = BigInt::from(3);
    let mut pow = BigInt::one();
    let mut t = 0u64;
    // Exponential probe then binary refine keeps this cheap for huge m.
    let mut step = 1u64;
    loop {
        let next = &pow * three.pow(step as u32);
        if next <= *m {
            pow = next;
            t += step;
            step *= 2;
        } else if step == 1 {
            return t;
        } else {
            step = 1;
        }
    }
}

/// Bracket `log3(m)` for integer `m >= 1` with `2^-frac_bits` width.
pub fn log3_int_bounds(m: &BigInt, frac_bits: usize) -> Log3Bounds {
    assert!(*m >= BigInt::one());
    if let Some(k) = int_power_of_three(m) {
        return Log3Bounds::exact(Rational::from_bigint(BigInt::from(k)));
    }
    let t = floor_log3_int(m);
    let pow3t = BigInt::from(3).pow(t as u32);
    let mut prec = 2 * frac_bits + 64;
    loop {
        if let Some(frac_lo) = extract_fraction_bits(m, &pow3t, prec, frac_bits) {
            let denom = BigInt::one() << frac_bits;
            let lo = Rational::from_big(BigInt::from(t) * &denom + &frac_lo, denom.clone());
            let hi = Rational::from_big(
                BigInt::from(t) * &denom + frac_lo + BigInt::one(),
                denom,
            );
            return Log3Bounds { lo, hi };
        }
        prec *= 2;
    }
}

/// Binary digits of `log3(m / 3^t)` in `[0,1)` by repeated interval squaring
/// at fixed-point precision `prec`. Returns `None` when the working interval
/// becomes too wide to decide a digit, signalling the caller to retry with
/// more precision.
fn extract_fraction_bits(
    m: &BigInt,
    pow3t: &BigInt,
    prec: usize,
    frac_bits: usize,
) -> Option<BigInt> {
    let scale = BigInt::one() << prec;
    // y = m / 3^t in (1, 3); interval [y_lo, y_hi] / 2^prec.
    let mut y_lo: BigInt = (m * &scale).div_floor(pow3t);
    let mut y_hi: BigInt = &y_lo + 1;
    let three_scaled = BigInt::from(3) * &scale;
    let mut bits = BigInt::zero();
    for _ in 0..frac_bits {
        // Square, rescale back to 2^prec.
        let a_lo: BigInt = (&y_lo * &y_lo).div_floor(&scale);
        let a_hi: BigInt = (&y_hi * &y_hi).div_ceil(&scale);
        bits <<= 1usize;
        if a_lo >= three_scaled {
            bits += 1;
            y_lo = a_lo.div_floor(&BigInt::from(3));
            y_hi = a_hi.div_ceil(&BigInt::from(3));
        } else if a_hi <= three_scaled {
            y_lo = a_lo;
            y_hi = a_hi;
        } else {
            return None;
        }
    }
    Some(bits)
}

/// Bracket `log3(x)` for rational `x > 0`.
pub fn log3_bounds(x: &Rational, frac_bits: usize) -> Log3Bounds {
    assert!(!x.is_zero() && !x.is_negative(), "log3 needs a positive argument");
    if let Some(k) = power_of_three_exponent(x) {
        return Log3Bounds::exact(Rational::from_integer(k));
    }
    let num = log3_int_bounds(x.numer(), frac_bits);
    let den = log3_int_bounds(x.denom(), frac_bits);
    Log3Bounds { lo: num.lo - &den.hi, hi: num.hi - &den.lo }
}

/// Exact comparison of a rational `q` against `log3(m)`, `m >= 1`.
///
/// Never returns `Equal` unless `m` is an exact power of three.
pub fn cmp_with_log3_int(q: &Rational, m: &BigInt) -> Ordering {
    assert!(*m >= BigInt::one());
    if let Some(k) = int_power_of_three(m) {
        return q.cmp(&Rational::from_bigint(BigInt::from(k)));
    }
    let mut bits = 32;
    loop {
        let b = log3_int_bounds(m, bits);
        if *q > b.hi {
            return Ordering::Greater;
        }
        if *q < b.lo {
            return Ordering::Less;
        }
        bits *= 2;
    }
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Decimal string of `log3(m) + offset` truncated to `digits` fractional
/// digits, certified correct by interval refinement.
pub fn log3_plus_offset_decimal(m: &BigInt, offset: i64, digits: usize) -> String {
    let ten_pow = BigInt::from(10).pow(digits as u32);
    let off = Rational::from_integer(offset);
    let mut bits = 4 * digits + 32;
    loop {
        let b = log3_int_bounds(m, bits);
        let lo = &b.lo + &off;
        let hi = &b.hi + &off;
        let d_lo = (lo.numer() * &ten_pow).div_floor(lo.denom());
        let d_hi = (hi.numer() * &ten_pow).div_floor(hi.denom());
        if d_lo == d_hi {
            let (int_part, frac_part) = d_lo.div_rem(&ten_pow);
            let mut frac = frac_part.to_string();
            while frac.len() < digits {
                frac.insert(0, '0');
            }
            return if digits == 0 {
                int_part.to_string()
            } else {
                format!("{}.{}", int_part, frac)
            };
        }
        bits *= 2;
    }
}
