//! Numeric traits the rest of the crate is generic over.
//!
//! [`Probability`] abstracts the field probabilities are computed in: `f64`
//! and `f32` for speed, [`BigRational`] when an exact answer is wanted.
//! [`ClassInt`] abstracts the unsigned integers used for class sizes, ranks
//! and payload values: fixed-width fast paths for short blocks and
//! [`BigUint`] for everything else.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{Num, One, Pow, Signed, ToPrimitive, Zero};
use rand::Rng;

pub trait Probability:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// True when arithmetic in this type is exact.
    const EXACT: bool;

    fn from_ratio(num: &BigUint, den: &BigUint) -> Self;

    /// Parses a decimal literal (`0.25`, `1e-3`) or a fraction (`1/4`).
    fn from_decimal(s: &str) -> Option<Self>;

    fn from_f64(v: f64) -> Option<Self>;

    fn as_f64(&self) -> f64;

    /// How far a probability vector may sum away from one and still be accepted.
    fn normalization_tolerance() -> Self;

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// `2^-k`.
    fn half_pow(k: u32) -> Self {
        Self::from_ratio(&BigUint::one(), &(BigUint::one() << k))
    }
}

impl Probability for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    fn from_decimal(s: &str) -> Option<Self> {
        parse_rational(s).map(|r| ToPrimitive::to_f64(&r).unwrap_or(f64::NAN))
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn normalization_tolerance() -> Self {
        1e-12
    }
}

impl Probability for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        f64::from_ratio(num, den) as f32
    }

    fn from_decimal(s: &str) -> Option<Self> {
        f64::from_decimal(s).map(|v| v as f32)
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v as f32)
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }

    fn normalization_tolerance() -> Self {
        1e-6
    }
}

impl Probability for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
    }

    fn from_decimal(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn normalization_tolerance() -> Self {
        BigRational::zero()
    }
}

/// Exact value of a decimal literal or `a/b` fraction. Signs are rejected.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = BigUint::from_str(num.trim()).ok()?;
        let den = BigUint::from_str(den.trim()).ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::from_ratio(&num, &den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = BigInt::from_str(&digits).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow(scale.unsigned_abs()))
    };
    Some(value)
}

/// Unsigned integer type for class sizes, ranks and payload values.
///
/// Implementors must be exact for any value that can arise from a block of
/// at most [`ClassInt::MAX_BLOCK_LEN`] symbols, including the intermediate
/// products `class_size * n` seen while ranking.
pub trait ClassInt: Clone + Ord + Debug + Num + Send + Sync + 'static {
    const MAX_BLOCK_LEN: usize;

    fn from_u32(v: u32) -> Self;

    fn mul_small(&self, k: u32) -> Self;

    /// Exact division; callers only divide when the quotient is integral.
    fn div_small(&self, k: u32) -> Self;

    /// Number of significant bits; zero for zero.
    fn bit_len(&self) -> u32;

    fn test_bit(&self, i: u32) -> bool;

    /// `2^k`.
    fn pow2(k: u32) -> Self;

    /// `self` with bits `0..k` cleared.
    fn clear_low_bits(&self, k: u32) -> Self;

    /// `self mod 2^k`.
    fn low_bits(&self, k: u32) -> Self;

    /// Appends one bit on the right: `2 * self + bit`.
    fn push_bit(&self, bit: bool) -> Self;

    fn is_power_of_two(&self) -> bool;

    /// Position of the highest bit where `self` and `other` differ.
    fn highest_differing_bit(&self, other: &Self) -> Option<u32>;

    /// Uniform draw from `0..bound` by rejection.
    fn sample_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self;

    fn to_biguint(&self) -> BigUint;

    fn from_biguint(v: &BigUint) -> Option<Self>;
}

macro_rules! impl_class_int_prim {
    ($t:ty, $max:expr) => {
        impl ClassInt for $t {
            const MAX_BLOCK_LEN: usize = $max;

            #[inline]
            fn from_u32(v: u32) -> Self {
                v as $t
            }

            #[inline]
            fn mul_small(&self, k: u32) -> Self {
                self * k as $t
            }

            #[inline]
            fn div_small(&self, k: u32) -> Self {
                self / k as $t
            }

            #[inline]
            fn bit_len(&self) -> u32 {
                <$t>::BITS - self.leading_zeros()
            }

            #[inline]
            fn test_bit(&self, i: u32) -> bool {
                i < <$t>::BITS && (self >> i) & 1 == 1
            }

            #[inline]
            fn pow2(k: u32) -> Self {
                1 << k
            }

            #[inline]
            fn clear_low_bits(&self, k: u32) -> Self {
                if k >= <$t>::BITS {
                    0
                } else {
                    (self >> k) << k
                }
            }

            #[inline]
            fn low_bits(&self, k: u32) -> Self {
                if k >= <$t>::BITS {
                    *self
                } else {
                    self & ((1 << k) - 1)
                }
            }

            #[inline]
            fn push_bit(&self, bit: bool) -> Self {
                (self << 1) | bit as $t
            }

            #[inline]
            fn is_power_of_two(&self) -> bool {
                <$t>::is_power_of_two(*self)
            }

            #[inline]
            fn highest_differing_bit(&self, other: &Self) -> Option<u32> {
                (self ^ other).checked_ilog2()
            }

            #[inline]
            fn sample_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self {
                rng.gen_range(0..*bound)
            }

            fn to_biguint(&self) -> BigUint {
                BigUint::from(*self)
            }

            fn from_biguint(v: &BigUint) -> Option<Self> {
                <$t>::try_from(v).ok()
            }
        }
    };
}

// (n+1)! must fit: 20! < 2^64 and 34! < 2^128.
impl_class_int_prim!(u64, 19);
impl_class_int_prim!(u128, 33);

impl ClassInt for BigUint {
    const MAX_BLOCK_LEN: usize = usize::MAX;

    fn from_u32(v: u32) -> Self {
        BigUint::from(v)
    }

    fn mul_small(&self, k: u32) -> Self {
        self * k
    }

    fn div_small(&self, k: u32) -> Self {
        self / k
    }

    fn bit_len(&self) -> u32 {
        self.bits() as u32
    }

    fn test_bit(&self, i: u32) -> bool {
        self.bit(i as u64)
    }

    fn pow2(k: u32) -> Self {
        BigUint::one() << k
    }

    fn clear_low_bits(&self, k: u32) -> Self {
        (self >> k) << k
    }

    fn low_bits(&self, k: u32) -> Self {
        if k >= self.bit_len() {
            self.clone()
        } else {
            self - self.clear_low_bits(k)
        }
    }

    fn push_bit(&self, bit: bool) -> Self {
        let mut v: BigUint = self << 1u32;
        if bit {
            v.set_bit(0, true);
        }
        v
    }

    fn is_power_of_two(&self) -> bool {
        !self.is_zero() && self.count_ones() == 1
    }

    fn highest_differing_bit(&self, other: &Self) -> Option<u32> {
        (self ^ other).bits().checked_sub(1).map(|b| b as u32)
    }

    fn sample_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self {
        rng.gen_biguint_below(bound)
    }

    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn from_biguint(v: &BigUint) -> Option<Self> {
        Some(v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        let r = parse_rational("0.7").unwrap();
        assert_eq!(r, BigRational::new(7.into(), 10.into()));
        assert_eq!(parse_rational("1e-3").unwrap(), BigRational::new(1.into(), 1000.into()));
        assert_eq!(parse_rational("2.5E1").unwrap(), BigRational::from_integer(25.into()));
        assert_eq!(parse_rational("1/3").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        for bad in ["", ".", "-0.5", "abc", "1/0", "0.5.1"] {
            assert!(parse_rational(bad).is_none(), "{bad:?}");
        }
    }

    #[test]
    fn float_probability_parse() {
        assert_eq!(f64::from_decimal("0.25"), Some(0.25));
        assert_eq!(f32::from_decimal("1/4"), Some(0.25));
    }

    fn bit_ops_agree<I: ClassInt>(v: u64) {
        let big = BigUint::from(v);
        let x = I::from_biguint(&big).unwrap();
        assert_eq!(x.bit_len() as u64, big.bits());
        for k in 0..66 {
            assert_eq!(x.test_bit(k), big.bit(k as u64));
            assert_eq!(x.clear_low_bits(k).to_biguint(), (&big >> k) << k);
            assert_eq!(x.low_bits(k).to_biguint(), &big % (BigUint::one() << k));
        }
        assert_eq!(x.push_bit(true).to_biguint(), (&big << 1u32) + 1u32);
        assert_eq!(x.is_power_of_two(), v.is_power_of_two());
    }

    #[test]
    fn fixed_width_and_big_bit_ops_agree() {
        for v in [0u64, 1, 2, 6, 40320, 0x4000_0000_0000_0001, u64::MAX >> 2] {
            bit_ops_agree::<u64>(v);
            bit_ops_agree::<u128>(v);
            bit_ops_agree::<BigUint>(v);
        }
    }
}
