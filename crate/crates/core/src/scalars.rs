//! Exact rationals and fixed-precision binary floating point.
//!
//! Every Gram and operator entry is first computed as an exact [`Rational`]
//! and only rounded once, into a [`BigFloat`] carrying `P` bits of
//! significand with round-half-to-even semantics.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Exact arbitrary-precision fraction, always held in lowest terms.
pub type Rational = RBig;

/// Binary floating-point number with an explicit significand precision.
pub type BigFloat = FBig<HalfEven, 2>;

/// Working precision used when nothing else is requested.
pub const DEFAULT_PRECISION: usize = 512;

/// Smallest precision accepted anywhere (binary64 significand width).
pub const MIN_PRECISION: usize = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn check_precision(precision: usize) -> Result<()> {
    if precision < MIN_PRECISION {
        Err(Error::PrecisionTooLow(precision))
    } else {
        Ok(())
    }
}

/// `num/den` in canonical form.
///
/// # Panics
/// Panics if `den` is zero.
pub fn ratio(num: i64, den: u64) -> Rational {
    assert!(den != 0, "zero denominator");
    RBig::from_parts(IBig::from(num), UBig::from(den))
}

pub fn rat_int(value: i64) -> Rational {
    RBig::from(value)
}

pub fn rat_arith(a: &Rational, b: &Rational, op: RatOp) -> Result<Rational> {
    Ok(match op {
        RatOp::Add => a + b,
        RatOp::Sub => a - b,
        RatOp::Mul => a * b,
        RatOp::Div => {
            if b.is_zero() {
                return Err(Error::DivisionByZero);
            }
            a / b
        }
    })
}

/// Nearest `precision`-bit float to `a`.
pub fn rat_to_bigfloat(a: &Rational, precision: usize) -> Result<BigFloat> {
    check_precision(precision)?;
    Ok(a.to_float::<HalfEven, 2>(precision).value())
}

pub fn rat_to_f64(a: &Rational) -> f64 {
    a.to_f64().value()
}

/// Exact binary value of `x`, rounded to `precision` bits (a no-op for `precision >= 53`).
///
/// # Panics
/// Panics on non-finite input.
pub fn bf_from_f64(x: f64, precision: usize) -> BigFloat {
    let exact = BigFloat::try_from(x).expect("finite f64");
    exact.with_precision(precision).value()
}

pub fn bf_from_int(x: i64, precision: usize) -> BigFloat {
    BigFloat::from(x).with_precision(precision).value()
}

pub fn bf_zero(precision: usize) -> BigFloat {
    BigFloat::ZERO.with_precision(precision).value()
}

pub fn bf_one(precision: usize) -> BigFloat {
    BigFloat::ONE.with_precision(precision).value()
}

/// `2^exp` at the given precision.
pub fn bf_pow2(exp: isize, precision: usize) -> BigFloat {
    BigFloat::from_parts(IBig::ONE, exp)
        .with_precision(precision)
        .value()
}

pub fn bf_to_f64(x: &BigFloat) -> f64 {
    x.to_f64().value()
}

/// Exact rational value of a finite float.
pub fn bf_to_rational(x: &BigFloat) -> Rational {
    let (sig, exp) = x.repr().clone().into_parts();
    if exp >= 0 {
        RBig::from(sig * IBig::from(UBig::ONE << exp as usize))
    } else {
        RBig::from_parts(sig, UBig::ONE << exp.unsigned_abs())
    }
}

pub fn bf_abs(x: &BigFloat) -> BigFloat {
    if x.sign() == dashu_base::Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    }
}

pub fn bf_is_zero(x: &BigFloat) -> bool {
    x.repr().significand().is_zero()
}

pub fn bf_is_negative(x: &BigFloat) -> bool {
    x.sign() == dashu_base::Sign::Negative && !bf_is_zero(x)
}

/// Correctly-rounded square root at the precision of `a`.
pub fn bf_sqrt(a: &BigFloat) -> Result<BigFloat> {
    if bf_is_negative(a) {
        return Err(Error::NegativeSqrt(bf_to_f64(a)));
    }
    if bf_is_zero(a) {
        return Ok(bf_zero(a.precision()));
    }
    Ok(a.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dashu_base::{Abs, UnsignedAbs};
    use proptest::prelude::*;

    fn canonical(r: &Rational) -> bool {
        use dashu_int::ops::Gcd;
        let g = r.numerator().unsigned_abs().gcd(r.denominator());
        g == UBig::ONE || r.is_zero() && *r.denominator() == UBig::ONE
    }

    #[test]
    fn adds_thirds_and_sixths() {
        let s = rat_arith(&ratio(1, 3), &ratio(1, 6), RatOp::Add).unwrap();
        assert_eq!(s, ratio(1, 2));
    }

    #[test]
    fn canonicalizes() {
        let r = RBig::from_parts(IBig::from(2), UBig::from(4u8));
        assert_eq!(r, ratio(1, 2));
        assert_eq!(*r.numerator(), IBig::from(1));
        assert_eq!(*r.denominator(), UBig::from(2u8));
    }

    #[test]
    fn moment_of_seven_thirds_power() {
        // ∫₀¹ x^{7/3} dx = 1 / (7/3 + 1)
        let q = ratio(7, 3);
        let denom = rat_arith(&q, &rat_int(1), RatOp::Add).unwrap();
        let m = rat_arith(&rat_int(1), &denom, RatOp::Div).unwrap();
        assert_eq!(m, ratio(3, 10));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = rat_arith(&ratio(1, 2), &rat_int(0), RatOp::Div);
        assert!(matches!(e, Err(Error::DivisionByZero)));
    }

    #[test]
    fn conversion_rounds_to_nearest() {
        assert_eq!(bf_to_f64(&rat_to_bigfloat(&ratio(1, 2), 53).unwrap()), 0.5);
        assert_eq!(bf_to_f64(&rat_to_bigfloat(&ratio(1, 3), 53).unwrap()), 1.0 / 3.0);

        let x = rat_to_bigfloat(&ratio(3, 10), 512).unwrap();
        assert_eq!(x.precision(), 512);
        let rel = (bf_to_rational(&x) - ratio(3, 10)) / ratio(3, 10);
        let bound = RBig::from_parts(IBig::ONE, UBig::ONE << 512);
        assert!(rel.abs() <= bound);
    }

    #[test]
    fn low_precision_rejected() {
        assert!(matches!(
            rat_to_bigfloat(&ratio(1, 3), 52),
            Err(Error::PrecisionTooLow(52))
        ));
    }

    #[test]
    fn sqrt_examples() {
        let p = 256;
        assert_eq!(bf_sqrt(&bf_from_int(4, p)).unwrap(), bf_from_int(2, p));
        assert!(bf_is_zero(&bf_sqrt(&bf_zero(p)).unwrap()));
        let r2 = bf_sqrt(&bf_from_int(2, p)).unwrap();
        let sq = &r2 * &r2;
        let err = bf_abs(&(sq - bf_from_int(2, p)));
        assert!(err <= bf_from_int(2, p).ulp());
        assert!(matches!(
            bf_sqrt(&bf_from_int(-1, p)),
            Err(Error::NegativeSqrt(_))
        ));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-10_000i64..10_000, 1u64..5_000).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #[test]
        fn field_laws_hold_exactly(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            for op in [RatOp::Add, RatOp::Sub, RatOp::Mul] {
                prop_assert!(canonical(&rat_arith(&a, &b, op).unwrap()));
            }
            if !b.is_zero() {
                prop_assert!(canonical(&rat_arith(&a, &b, RatOp::Div).unwrap()));
            }
        }

        #[test]
        fn conversion_is_monotone(a in arb_rational(), b in arb_rational(), p in 53usize..300) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(rat_to_bigfloat(&lo, p).unwrap() <= rat_to_bigfloat(&hi, p).unwrap());
        }
    }

    #[test]
    fn sqrt_squares_back_within_two_ulp() {
        use proptest::test_runner::{Config, TestRunner};
        let mut runner = TestRunner::new(Config::with_cases(10_000));
        runner
            .run(&(1u64..u64::MAX, -200isize..200, 53usize..600), |(m, e, p)| {
                let x = BigFloat::from_parts(IBig::from(m), e).with_precision(p).value();
                let r = bf_sqrt(&x).unwrap();
                let err = bf_abs(&(&r * &r - &x));
                let two_ulp = x.ulp() * bf_from_int(2, p);
                prop_assert!(err <= two_ulp);
                Ok(())
            })
            .unwrap();
    }
}
