//! Randomized payload length for one block.
//!
//! Write the class size as `N = sum_i alpha_i 2^i`. The index range `[0, N)`
//! is cut into one dyadic interval per set bit, taken from the top bit down:
//! the interval for bit `d` starts at `offset(d) = sum_{l>d} alpha_l 2^l`
//! and holds `2^d` indices. A block carries `d` payload bits `r` by emitting
//! the member with index `tau = offset(d) + r`. Choosing `d` with probability
//! `alpha_d 2^d / N` and `r` uniformly makes `tau` uniform on `[0, N)`.
//!
//! Since `tau < N`, the highest bit where `tau` and `N` differ is set in `N`
//! and clear in `tau`; that bit is `d`, and the bits below it are `r`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{ClassInt, Probability};

/// Binary digits of a positive class size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryExpansion<I = BigUint> {
    value: I,
    top: u32,
}

/// One realized payload choice: `d` bits carrying value `r`, sent as index `tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaDraw<I = BigUint> {
    pub d: u32,
    pub r: I,
    pub tau: I,
}

pub fn expand(n: &BigUint) -> Result<BinaryExpansion<BigUint>> {
    BinaryExpansion::new(n.clone())
}

impl<I: ClassInt> BinaryExpansion<I> {
    pub fn new(value: I) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::NonPositive);
        }
        let top = value.bit_len() - 1;
        Ok(BinaryExpansion { value, top })
    }

    pub fn value(&self) -> &I {
        &self.value
    }

    /// `m = floor(log2 N)`; the leading digit.
    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn alpha(&self, i: u32) -> bool {
        self.value.test_bit(i)
    }

    /// Digits `alpha_m, ..., alpha_0`, most significant first.
    pub fn digits(&self) -> Vec<bool> {
        (0..=self.top).rev().map(|i| self.alpha(i)).collect()
    }

    /// Set bits, most significant first. These are the possible payload lengths.
    pub fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.top).rev().filter(|&i| self.alpha(i))
    }

    /// First index of the interval belonging to payload length `d`.
    pub fn offset(&self, d: u32) -> I {
        self.value.clear_low_bits(d + 1)
    }

    pub fn encode_index(&self, d: u32, r: I) -> Result<I> {
        if d > self.top || !self.alpha(d) {
            return Err(Error::InvalidDelta(d));
        }
        if r.bit_len() > d {
            return Err(Error::PayloadOutOfRange(d));
        }
        Ok(self.offset(d) + r)
    }

    pub fn decode_index(&self, tau: &I) -> Result<(u32, I)> {
        if *tau >= self.value {
            return Err(Error::IndexOutOfRange {
                index: format!("{tau:?}"),
                size: format!("{:?}", self.value),
            });
        }
        let d = self
            .value
            .highest_differing_bit(tau)
            .expect("tau < N implies they differ");
        Ok((d, tau.low_bits(d)))
    }

    /// `p(Delta = i) = alpha_i 2^i / N` for `i = m, ..., 0`, zero entries included.
    pub fn delta_probabilities<P: Probability>(&self) -> Vec<(u32, P)> {
        let n = self.value.to_biguint();
        (0..=self.top)
            .rev()
            .map(|i| {
                let p = if self.alpha(i) {
                    P::from_ratio(&(BigUint::from(1u32) << i), &n)
                } else {
                    P::zero()
                };
                (i, p)
            })
            .collect()
    }

    /// Draws a payload length. A power-of-two class size leaves no choice and
    /// consumes no randomness.
    pub fn sample_delta<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.value.is_power_of_two() {
            return self.top;
        }
        let t = I::sample_below(&self.value, rng);
        self.decode_index(&t).expect("sample below N").0
    }

    /// `(1/N) sum_l l alpha_l 2^l`, exactly.
    pub fn expected_payload_bits(&self) -> BigRational {
        let n = self.value.to_biguint();
        let total = self
            .levels()
            .fold(BigUint::zero(), |acc, l| acc + (BigUint::from(l) << l));
        BigRational::from_ratio(&total, &n)
    }

    pub fn expected_payload_bits_f64(&self) -> f64 {
        self.expected_payload_bits().to_f64().unwrap_or(f64::NAN)
    }
}
