//! The convexity gap on the probability simplex: for nonnegative `a, b, c`
//! with `a + b + c = 1`, the entropy-like sum `a log3 a + b log3 b + c log3 c`
//! never falls below -1, with equality exactly at the barycenter. Terms with
//! value zero contribute zero.

use crate::log3::{log3_bounds, power_of_three_exponent, Log3Bounds};
use crate::rational::Rational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum JensenError {
    #[error("inputs must be nonnegative rationals summing to 1 (got {a}, {b}, {c})")]
    OffSimplex { a: Rational, b: Rational, c: Rational },
}

/// `1e-12`, the pinned comparison tolerance.
pub fn jensen_tolerance() -> Rational {
    Rational::new(1, 1_000_000_000_000)
}

/// Certified bounds on `x * log3(x)`, exact for `x = 0` and powers of three.
fn term_bounds(x: &Rational, frac_bits: usize) -> Log3Bounds {
    if x.is_zero() {
        return Log3Bounds { lo: Rational::zero(), hi: Rational::zero() };
    }
    if let Some(k) = power_of_three_exponent(x) {
        let exact = x * &Rational::from_integer(k);
        return Log3Bounds { lo: exact.clone(), hi: exact };
    }
    log3_bounds(x, frac_bits).scale(x)
}

/// Certified bounds on the full sum at the given precision.
pub fn jensen_sum_bounds(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    frac_bits: usize,
) -> Result<Log3Bounds, JensenError> {
    validate(a, b, c)?;
    let sum = term_bounds(a, frac_bits)
        .add(&term_bounds(b, frac_bits))
        .add(&term_bounds(c, frac_bits));
    Ok(sum)
}

fn validate(a: &Rational, b: &Rational, c: &Rational) -> Result<(), JensenError> {
    let on_simplex = !a.is_negative()
        && !b.is_negative()
        && !c.is_negative()
        && (a + b + c) == Rational::one();
    if on_simplex {
        Ok(())
    } else {
        Err(JensenError::OffSimplex { a: a.clone(), b: b.clone(), c: c.clone() })
    }
}

/// True iff the sum is at least `-1 - 1e-12`, decided with certified
/// precision. The interval is refined until it clears the threshold one way
/// or the other; if the value is still indistinguishable from the threshold
/// at 8192 fractional bits it is within any sane reading of the tolerance,
/// and the check passes.
pub fn jensen_gap_check(a: &Rational, b: &Rational, c: &Rational) -> Result<bool, JensenError> {
    validate(a, b, c)?;
    let threshold = -Rational::one() - jensen_tolerance();
    let mut bits = 64usize;
    while bits <= 8192 {
        let sum = jensen_sum_bounds(a, b, c, bits)?;
        if sum.lo >= threshold {
            return Ok(true);
        }
        if sum.hi < threshold {
            return Ok(false);
        }
        bits *= 2;
    }
    Ok(true)
}

/// A uniformly random exact point on the simplex with denominator `denom`.
pub fn sample_simplex_triple<R: rand::Rng + ?Sized>(rng: &mut R, denom: i64) -> (Rational, Rational, Rational) {
    let mut u = rng.random_range(0..=denom);
    let mut v = rng.random_range(0..=denom);
    if u > v {
        std::mem::swap(&mut u, &mut v);
    }
    (
        Rational::new(u, denom),
        Rational::new(v - u, denom),
        Rational::new(denom - v, denom),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn barycenter_is_exactly_minus_one() {
        let third = r(1, 3);
        let b = jensen_sum_bounds(&third, &third, &third, 64).unwrap();
        assert_eq!(b.lo, r(-1, 1));
        assert_eq!(b.hi, r(-1, 1));
        assert!(jensen_gap_check(&third, &third, &third).unwrap());
    }

    #[test]
    fn vertex_is_zero() {
        let b = jensen_sum_bounds(&Rational::one(), &Rational::zero(), &Rational::zero(), 64)
            .unwrap();
        assert_eq!(b.lo, Rational::zero());
        assert_eq!(b.hi, Rational::zero());
        assert!(jensen_gap_check(&Rational::one(), &Rational::zero(), &Rational::zero()).unwrap());
    }

    #[test]
    fn off_simplex_is_rejected() {
        assert!(jensen_gap_check(&r(1, 2), &r(1, 2), &r(1, 2)).is_err());
        assert!(jensen_gap_check(&r(-1, 2), &r(1, 2), &Rational::one()).is_err());
    }

    #[test]
    fn random_triples_never_fall_below() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let (a, b, c) = sample_simplex_triple(&mut rng, 720);
            assert!(jensen_gap_check(&a, &b, &c).unwrap(), "({a}, {b}, {c})");
        }
    }

    #[test]
    fn near_boundary_points_stay_above() {
        // Slightly perturbed barycenter: strictly above -1.
        let a = r(33333, 100000);
        let b = r(33334, 100000);
        let c = r(33333, 100000);
        assert!(jensen_gap_check(&a, &b, &c).unwrap());
        let bounds = jensen_sum_bounds(&a, &b, &c, 96).unwrap();
        assert!(bounds.lo > r(-1, 1) - jensen_tolerance());
    }
}
