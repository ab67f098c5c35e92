//! Exact dyadic rationals for the certified integer-arithmetic mode.
//!
//! A [`DyadicRational`] is `numerator / 2^exponent` kept normalized so the
//! numerator is odd (or zero). The general [`BigRational`] type used by the
//! contour oracle, where denominators are not powers of 2, comes from
//! `num-rational`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("value does not fit in a 64-bit float")]
    FloatOverflow,
    #[error("cannot parse {0:?} as a dyadic rational")]
    Parse(String),
}

/// Exact value `numerator / 2^exponent` with the numerator odd or zero.
///
/// The exponent is signed: even integers normalize to an odd numerator and a
/// negative exponent (e.g. `12 = 3 / 2^-2`), which keeps the 2-adic
/// valuation readable straight off the representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numer: BigInt,
    exp: i64,
}

impl DyadicRational {
    /// Builds `numer / 2^exp` and normalizes.
    pub fn new(numer: BigInt, exp: i64) -> Self {
        let mut v = DyadicRational { numer, exp };
        v.normalize();
        v
    }

    pub fn zero() -> Self {
        DyadicRational {
            numer: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        DyadicRational {
            numer: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        DyadicRational::new(BigInt::from(n), 0)
    }

    fn normalize(&mut self) {
        if self.numer.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.numer.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.numer >>= tz;
            self.exp -= tz as i64;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numer
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let exp = self.exp.max(rhs.exp);
        let a = &self.numer << (exp - self.exp) as u64;
        let b = &rhs.numer << (exp - rhs.exp) as u64;
        DyadicRational::new(a + b, exp)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let exp = self.exp.max(rhs.exp);
        let a = &self.numer << (exp - self.exp) as u64;
        let b = &rhs.numer << (exp - rhs.exp) as u64;
        DyadicRational::new(a - b, exp)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return DyadicRational::zero();
        }
        // odd * odd stays odd; no renormalization needed
        DyadicRational {
            numer: &self.numer * &rhs.numer,
            exp: self.exp + rhs.exp,
        }
    }

    pub fn neg(&self) -> Self {
        DyadicRational {
            numer: -&self.numer,
            exp: self.exp,
        }
    }

    /// Exact division by 2.
    pub fn halve(&self) -> Self {
        if self.is_zero() {
            return DyadicRational::zero();
        }
        DyadicRational {
            numer: self.numer.clone(),
            exp: self.exp + 1,
        }
    }

    pub fn double(&self) -> Self {
        if self.is_zero() {
            return DyadicRational::zero();
        }
        DyadicRational {
            numer: self.numer.clone(),
            exp: self.exp - 1,
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            numer: self.numer.abs(),
            exp: self.exp,
        }
    }

    /// Round-to-nearest-even conversion to `f64`.
    ///
    /// Exact whenever the numerator fits in 53 bits; errors when the
    /// magnitude exceeds the float range.
    pub fn to_f64(&self) -> Result<f64, ArithError> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let mag = self.numer.magnitude();
        let bits = mag.bits();
        // magnitude is in [2^(bits-1-exp), 2^(bits-exp))
        let top = bits as i64 - self.exp;
        if top > 1024 {
            return Err(ArithError::FloatOverflow);
        }
        if top < -1080 {
            return Ok(if self.numer.sign() == Sign::Minus {
                -0.0
            } else {
                0.0
            });
        }
        let (mant, shift) = if bits <= 53 {
            (mag.to_u64().unwrap(), 0i64)
        } else {
            let shift = bits - 53;
            let mut q = (mag >> (shift - 1)).to_u64().unwrap(); // 54 bits
            let round = q & 1;
            q >>= 1;
            let sticky = shift >= 2 && mag.trailing_zeros().unwrap() < shift - 1;
            if round == 1 && (sticky || q & 1 == 1) {
                q += 1; // may become 2^53, still exactly representable
            }
            (q, shift as i64)
        };
        let e = shift - self.exp;
        let scaled = scale_by_pow2(mant as f64, e);
        if scaled.is_infinite() {
            return Err(ArithError::FloatOverflow);
        }
        Ok(if self.numer.sign() == Sign::Minus {
            -scaled
        } else {
            scaled
        })
    }

    /// Decimal rendering (via the shortest round-trip `f64` form) for reports.
    pub fn to_decimal_string(&self) -> String {
        match self.to_f64() {
            Ok(v) => format!("{v}"),
            Err(_) => String::from("overflow"),
        }
    }
}

/// `x * 2^e` without intermediate rounding for in-range results.
fn scale_by_pow2(x: f64, mut e: i64) -> f64 {
    let mut r = x;
    while e > 1023 {
        r *= f64::from_bits(0x7FE0000000000000); // 2^1023
        e -= 1023;
        if r.is_infinite() {
            return r;
        }
    }
    while e < -1022 {
        r *= f64::from_bits(0x0010000000000000); // 2^-1022
        e += 1022;
    }
    if e >= 0 {
        r * f64::from_bits(((1023 + e as u64) << 52) as u64)
    } else {
        r * f64::from_bits(((1023 + e) as u64) << 52)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numer, self.exp)
    }
}

impl FromStr for DyadicRational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        match s.split_once("/2^") {
            Some((num, exp)) => {
                let numer = BigInt::from_str(num.trim()).map_err(|_| bad())?;
                let exp = i64::from_str(exp.trim()).map_err(|_| bad())?;
                Ok(DyadicRational::new(numer, exp))
            }
            None => {
                let numer = BigInt::from_str(s.trim()).map_err(|_| bad())?;
                Ok(DyadicRational::new(numer, 0))
            }
        }
    }
}

impl From<&DyadicRational> for BigRational {
    fn from(d: &DyadicRational) -> Self {
        if d.exp >= 0 {
            BigRational::new(d.numer.clone(), BigInt::one() << d.exp as u64)
        } else {
            BigRational::from_integer(&d.numer << (-d.exp) as u64)
        }
    }
}

/// Converts a rational back to dyadic form; `None` when the reduced
/// denominator is not a power of two.
pub fn rational_to_dyadic(r: &BigRational) -> Option<DyadicRational> {
    let den = r.denom();
    if den.is_zero() {
        return None;
    }
    let tz = den.trailing_zeros().unwrap_or(0);
    if (den >> tz).is_one() {
        Some(DyadicRational::new(r.numer().clone(), tz as i64))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::two_adic_valuation;
    use num_bigint::RandBigInt;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn d(n: i64, e: i64) -> DyadicRational {
        DyadicRational::new(n.into(), e)
    }

    #[test]
    fn add_examples() {
        assert_eq!(d(-1, 1).add(&d(-1, 1)), d(-1, 0));
        assert_eq!(d(1, 3).add(&DyadicRational::zero()), d(1, 3));
        assert_eq!(d(15, 7).add(&d(-1, 2)), d(-17, 7));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(d(-1, 1).mul(&d(-1, 1)), d(1, 2));
        assert_eq!(d(1, 3).mul(&DyadicRational::zero()), DyadicRational::zero());
        assert_eq!(d(-1, 1).mul(&d(15, 7)), d(-15, 8));
    }

    #[test]
    fn halve_examples() {
        assert_eq!(DyadicRational::one().halve(), d(1, 1));
        assert_eq!(d(-15, 7).halve(), d(-15, 8));
        assert_eq!(DyadicRational::zero().halve(), DyadicRational::zero());
    }

    #[test]
    fn to_f64_examples() {
        assert_eq!(d(-1, 1).to_f64().unwrap(), -0.5);
        assert_eq!(d(15, 7).to_f64().unwrap(), 0.1171875);
        // exact 53-bit boundary and beyond
        let big = DyadicRational::new(BigInt::from((1u64 << 53) + 1), 0);
        assert_eq!(big.to_f64().unwrap(), 9007199254740992.0); // ties to even
        let huge = DyadicRational::new(BigInt::one() << 1100u32, 0);
        assert_eq!(huge.to_f64(), Err(ArithError::FloatOverflow));
    }

    #[test]
    fn normalization_and_round_trip() {
        let x = DyadicRational::new(BigInt::from(40), 5); // 40/32 = 5/4
        assert_eq!(x, d(5, 2));
        assert_eq!(x.to_string(), "5/2^2");
        assert_eq!("5/2^2".parse::<DyadicRational>().unwrap(), x);
        assert_eq!("12".parse::<DyadicRational>().unwrap(), d(3, -2));
        assert_eq!(DyadicRational::zero().exponent(), 0);
        assert!("1/3".parse::<DyadicRational>().is_err());
    }

    #[test]
    fn field_laws_random() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..10_000 {
            let mut sample = || {
                let bits = rng.gen_range(1..=256);
                DyadicRational::new(rng.gen_bigint(bits), rng.gen_range(-64..256))
            };
            let (a, b, c) = (sample(), sample(), sample());
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            // result exponent never exceeds the operand maximum
            assert!(a.add(&b).exponent() <= a.exponent().max(b.exponent()));
            // valuation is additive under multiplication
            if !a.is_zero() && !b.is_zero() {
                assert_eq!(
                    two_adic_valuation(&a.mul(&b)),
                    Some(
                        two_adic_valuation(&a).unwrap() + two_adic_valuation(&b).unwrap()
                    )
                );
            }
            // conversion agrees with rational arithmetic
            let ar: BigRational = (&a).into();
            let br: BigRational = (&b).into();
            let sum: BigRational = (&a.add(&b)).into();
            assert_eq!(sum, ar + br);
        }
    }
}
