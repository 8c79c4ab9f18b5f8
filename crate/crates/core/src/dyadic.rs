//! Exact arithmetic on non-negative dyadic rationals.
//!
//! A [`DyadicRational`] is `mantissa * 2^exponent` with an odd mantissa (or the
//! canonical zero). Digit `k` of a value is the coefficient of `2^k` in its
//! terminating binary expansion. On top of that representation live the two
//! digitwise operations of the Cantor group picture of `[0, inf)`:
//!
//! * carryless addition (`xor`), digit `k` of the result is `x_k + y_k mod 2`;
//! * carryless multiplication (`clmul`), digit `k` is `sum_j x_j y_(k-j) mod 2`,
//!   i.e. GF(2) polynomial multiplication of the mantissas.
//!
//! Points with two binary expansions are always represented by the
//! terminating one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitXor, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Largest accepted exponent magnitude at construction time.
pub const MAX_EXPONENT: i64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadicError {
    #[error("exponent {0} exceeds the supported magnitude 2^16")]
    ExponentOutOfRange(i64),
    #[error("value must be finite and non-negative, got {0}")]
    NotRepresentable(f64),
    #[error("Walsh functions are evaluated on [0, 1), got {0}")]
    OutsideUnitInterval(DyadicRational),
    #[error("cannot parse {0:?} as a binary expansion")]
    Parse(String),
}

/// A non-negative value on the unit circle of signs, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self.is_minus() != rhs.is_minus())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigUint,
    exponent: i64,
}

impl DyadicRational {
    /// Builds `mantissa * 2^exponent` in canonical form.
    pub fn new(mantissa: impl Into<BigUint>, exponent: i64) -> Result<Self, DyadicError> {
        let value = Self::canonical(mantissa.into(), exponent);
        if value.exponent.abs() > MAX_EXPONENT {
            return Err(DyadicError::ExponentOutOfRange(value.exponent));
        }
        Ok(value)
    }

    pub fn zero() -> Self {
        DyadicRational {
            mantissa: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    pub fn from_u64(n: u64) -> Self {
        Self::canonical(BigUint::from(n), 0)
    }

    /// The grid point `j * 2^(-bits)`.
    pub fn grid(j: u64, bits: u32) -> Self {
        Self::canonical(BigUint::from(j), -i64::from(bits))
    }

    /// Exact conversion; every finite non-negative `f64` is a dyadic rational.
    pub fn from_f64(x: f64) -> Result<Self, DyadicError> {
        if !x.is_finite() || x < 0.0 {
            return Err(DyadicError::NotRepresentable(x));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Ok(Self::canonical(BigUint::from(mantissa), exponent))
    }

    fn canonical(mut mantissa: BigUint, mut exponent: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Self::zero(),
            Some(tz) => {
                if tz > 0 {
                    mantissa >>= tz;
                    exponent += tz as i64;
                }
                DyadicRational { mantissa, exponent }
            }
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Binary digit `x_k`, the coefficient of `2^k`.
    pub fn digit(&self, k: i64) -> bool {
        let idx = k - self.exponent;
        idx >= 0 && self.mantissa.bit(idx as u64)
    }

    /// Position of the most significant nonzero digit, `None` for zero.
    pub fn leading_digit(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + self.mantissa.bits() as i64 - 1)
        }
    }

    /// Position of the least significant nonzero digit, `None` for zero.
    pub fn trailing_digit(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent)
        }
    }

    pub fn is_below_one(&self) -> bool {
        self.leading_digit().is_none_or(|d| d < 0)
    }

    /// `2^shift * self`.
    pub fn mul_pow2(&self, shift: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicRational {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + shift,
        }
    }

    /// Carryless addition.
    pub fn xor(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let exponent = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - exponent) as usize;
        let b = &other.mantissa << (other.exponent - exponent) as usize;
        Self::canonical(a ^ b, exponent)
    }

    /// Carryless multiplication.
    pub fn clmul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let exponent = self.exponent + other.exponent;
        if let (Some(a), Some(b)) = (self.mantissa.to_u64(), other.mantissa.to_u64()) {
            let product = clmul_u64(a, b);
            return Self::canonical(BigUint::from(product), exponent);
        }
        let (sparse, dense) = if self.mantissa.count_ones() <= other.mantissa.count_ones() {
            (&self.mantissa, &other.mantissa)
        } else {
            (&other.mantissa, &self.mantissa)
        };
        let mut acc = BigUint::zero();
        for pos in set_bits(sparse) {
            acc ^= dense << pos as usize;
        }
        Self::canonical(acc, exponent)
    }

    /// Digit `k` of `self ⊗ other` without forming the product.
    pub fn clmul_digit(&self, other: &Self, k: i64) -> bool {
        if self.is_zero() || other.is_zero() {
            return false;
        }
        let (sparse, dense) = if self.mantissa.count_ones() <= other.mantissa.count_ones() {
            (self, other)
        } else {
            (other, self)
        };
        let mut parity = false;
        for pos in set_bits(&sparse.mantissa) {
            let j = sparse.exponent + pos as i64;
            parity ^= dense.digit(k - j);
        }
        parity
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let m = self.mantissa.to_f64().unwrap_or(f64::INFINITY);
        m * 2f64.powf(self.exponent as f64)
    }
}

fn clmul_u64(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut rest = a;
    while rest != 0 {
        let pos = rest.trailing_zeros();
        acc ^= (b as u128) << pos;
        rest &= rest - 1;
    }
    acc
}

fn set_bits(n: &BigUint) -> impl Iterator<Item = u64> + '_ {
    n.iter_u64_digits().enumerate().flat_map(|(word, mut bits)| {
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let pos = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(word as u64 * 64 + pos)
            }
        })
    })
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.leading_digit(), other.leading_digit()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(a), Some(b)) if a != b => return a.cmp(&b),
            _ => {}
        }
        let exponent = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - exponent) as usize;
        let b = &other.mantissa << (other.exponent - exponent) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl BitXor for &DyadicRational {
    type Output = DyadicRational;

    fn bitxor(self, rhs: &DyadicRational) -> DyadicRational {
        self.xor(rhs)
    }
}

impl From<u64> for DyadicRational {
    fn from(n: u64) -> Self {
        Self::from_u64(n)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Some(top), Some(bottom)) = (self.leading_digit(), self.trailing_digit()) else {
            return f.write_str("0");
        };
        let mut out = String::new();
        for k in (0..=top.max(0)).rev() {
            out.push(if self.digit(k) { '1' } else { '0' });
        }
        if bottom < 0 {
            out.push('.');
            for k in (bottom..0).rev() {
                out.push(if self.digit(k) { '1' } else { '0' });
            }
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DyadicRational {
    type Err = DyadicError;

    /// Parses a binary expansion such as `101.011`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DyadicError::Parse(s.to_string());
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits: String = [int_part, frac_part].concat();
        if !digits.chars().all(|c| c == '0' || c == '1') {
            return Err(bad());
        }
        let mantissa = if digits.is_empty() {
            BigUint::zero()
        } else {
            BigUint::parse_bytes(digits.as_bytes(), 2).ok_or_else(bad)?
        };
        Self::new(mantissa, -(frac_part.len() as i64))
    }
}

/// `x ⊕ y`.
pub fn dyadic_add(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
    x.xor(y)
}

/// `x ⊗ y`.
pub fn dyadic_mul(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
    x.clmul(y)
}

/// The Walsh character `e_W(x) = (-1)^(x_(-1))`.
pub fn e_walsh(x: &DyadicRational) -> Sign {
    Sign::from_parity(x.digit(-1))
}

/// `W_n(x)` through the character form `e_W(x ⊗ n)`.
///
/// Only digit `-1` of the carryless product is needed, which costs one digit
/// lookup per set bit of `n`.
pub fn walsh_eval(n: u64, x: &DyadicRational) -> Result<Sign, DyadicError> {
    if !x.is_below_one() {
        return Err(DyadicError::OutsideUnitInterval(x.clone()));
    }
    let mut parity = false;
    let mut rest = n;
    while rest != 0 {
        let i = rest.trailing_zeros() as i64;
        parity ^= x.digit(-1 - i);
        rest &= rest - 1;
    }
    Ok(Sign::from_parity(parity))
}

/// `W_n(x)` through the defining recursion
/// `W_(2n)(x) = W_n(2x) + W_n(2x - 1)`, `W_(2n+1)(x) = W_n(2x) - W_n(2x - 1)`.
pub fn walsh_eval_recursive(n: u64, x: &DyadicRational) -> Result<Sign, DyadicError> {
    if !x.is_below_one() {
        return Err(DyadicError::OutsideUnitInterval(x.clone()));
    }
    let mut sign = Sign::Plus;
    let mut n = n;
    let mut x = x.clone();
    while n != 0 {
        let right_half = x.digit(-1);
        // 2x, minus one when x was in the right half
        x = x.mul_pow2(1);
        if right_half {
            x = x.xor(&DyadicRational::one());
            if n & 1 == 1 {
                sign = sign * Sign::Minus;
            }
        }
        n >>= 1;
    }
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn f(x: f64) -> DyadicRational {
        DyadicRational::from_f64(x).unwrap()
    }

    /// Digit-by-digit oracle for both operations, working on explicit digit maps.
    fn digits_of(x: &DyadicRational) -> Vec<(i64, bool)> {
        match (x.trailing_digit(), x.leading_digit()) {
            (Some(lo), Some(hi)) => (lo..=hi).map(|k| (k, x.digit(k))).collect(),
            _ => Vec::new(),
        }
    }

    fn from_digit_fn(lo: i64, hi: i64, digit: impl Fn(i64) -> bool) -> DyadicRational {
        let mut acc = DyadicRational::zero();
        for k in lo..=hi {
            if digit(k) {
                acc = acc.xor(&DyadicRational::one().mul_pow2(k));
            }
        }
        acc
    }

    fn xor_oracle(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
        from_digit_fn(-120, 120, |k| x.digit(k) ^ y.digit(k))
    }

    fn clmul_oracle(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
        let xd = digits_of(x);
        from_digit_fn(-240, 240, |k| {
            xd.iter()
                .filter(|(j, xj)| *xj && y.digit(k - j))
                .count()
                % 2
                == 1
        })
    }

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(12u32, -4).unwrap();
        assert_eq!(x.mantissa(), &BigUint::from(3u32));
        assert_eq!(x.exponent(), -2);
        let z = DyadicRational::new(0u32, 17).unwrap();
        assert_eq!(z.exponent(), 0);
        assert_eq!(z, DyadicRational::zero());
    }

    #[test]
    fn exponent_guard() {
        assert!(DyadicRational::new(1u32, MAX_EXPONENT).is_ok());
        assert_eq!(
            DyadicRational::new(1u32, -MAX_EXPONENT - 1),
            Err(DyadicError::ExponentOutOfRange(-MAX_EXPONENT - 1))
        );
        // trailing zeros are absorbed before the guard applies
        assert!(DyadicRational::new(4u32, -MAX_EXPONENT - 2).is_ok());
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(format!("{:?}", d("101.011")), "101.011");
        assert_eq!(d("101.011").to_f64(), 5.375);
        assert_eq!(d("0.01").to_string(), "0.01");
        assert_eq!(d("000").to_string(), "0");
        assert_eq!(d("1100").to_string(), "1100");
        assert!("10.2".parse::<DyadicRational>().is_err());
        assert!(".".parse::<DyadicRational>().is_err());
    }

    #[test]
    fn from_f64_is_exact() {
        assert_eq!(f(0.75), d("0.11"));
        assert_eq!(f(6.0), d("110"));
        assert_eq!(f(0.3).to_f64(), 0.3);
        assert!(DyadicRational::from_f64(-1.0).is_err());
        assert!(DyadicRational::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn add_examples() {
        assert_eq!(dyadic_add(&f(0.5), &f(0.5)), DyadicRational::zero());
        assert_eq!(dyadic_add(&f(0.75), &f(0.5)), xor_oracle(&f(0.75), &f(0.5)));
        assert_eq!(dyadic_add(&f(0.75), &f(0.5)), f(0.25));
        assert_eq!(dyadic_add(&f(5.0), &f(3.0)), xor_oracle(&f(5.0), &f(3.0)));
        assert_eq!(dyadic_add(&f(5.0), &f(3.0)), f(6.0));
    }

    #[test]
    fn mul_examples() {
        let y = d("1011.0011");
        assert_eq!(dyadic_mul(&DyadicRational::one(), &y), y);
        assert_eq!(dyadic_mul(&f(0.5), &f(3.0)), f(1.5));
        assert_eq!(dyadic_mul(&f(3.0), &f(3.0)), clmul_oracle(&f(3.0), &f(3.0)));
        assert_eq!(dyadic_mul(&f(3.0), &f(3.0)), f(5.0));
    }

    #[test]
    fn mul_wide_operands() {
        let x = d("1101000000000000000000000000000000000000000000000000000000000000000001.1");
        let y = d("100000000000000000000000000000000000000000000000000000000000000000000011");
        assert_eq!(x.clmul(&y), clmul_oracle(&x, &y));
        assert_eq!(x.clmul(&y), y.clmul(&x));
    }

    #[test]
    fn character_examples() {
        assert_eq!(e_walsh(&f(0.25)), Sign::Plus);
        assert_eq!(e_walsh(&f(0.5)), Sign::Minus);
        assert_eq!(e_walsh(&f(2.0)), Sign::Plus);
        assert_eq!(e_walsh(&f(3.5)), Sign::Minus);
    }

    #[test]
    fn walsh_examples() {
        for eval in [walsh_eval, walsh_eval_recursive] {
            assert_eq!(eval(1, &f(0.25)).unwrap(), Sign::Plus);
            assert_eq!(eval(1, &f(0.75)).unwrap(), Sign::Minus);
            assert_eq!(eval(3, &f(0.5)).unwrap(), Sign::Minus);
            assert_eq!(eval(6, &f(0.3)).unwrap(), Sign::Minus);
            assert_eq!(eval(2, &f(0.25)).unwrap(), Sign::Minus);
            assert!(eval(1, &f(1.0)).is_err());
        }
        // W_6(x) = W_3(2x) on the left half
        assert_eq!(walsh_eval_recursive(3, &f(0.6)).unwrap(), Sign::Minus);
    }

    #[test]
    fn walsh_tables_match_displayed_definitions() {
        let w1 = |x: f64| if x < 0.5 { 1 } else { -1 };
        let w2 = |x: f64| if (0.0..0.25).contains(&x) || (0.5..0.75).contains(&x) { 1 } else { -1 };
        let w3 = |x: f64| if (0.25..0.75).contains(&x) { -1 } else { 1 };
        for j in 0..64u64 {
            let x = DyadicRational::grid(j, 6);
            let xf = x.to_f64();
            assert_eq!(walsh_eval(1, &x).unwrap().value(), w1(xf));
            assert_eq!(walsh_eval(2, &x).unwrap().value(), w2(xf));
            assert_eq!(walsh_eval(3, &x).unwrap().value(), w3(xf));
        }
    }

    #[test]
    fn character_form_is_e_of_product() {
        for n in 0..256u64 {
            for j in 0..256u64 {
                let x = DyadicRational::grid(j, 8);
                let literal = e_walsh(&dyadic_mul(&x, &DyadicRational::from_u64(n)));
                assert_eq!(walsh_eval(n, &x).unwrap(), literal);
            }
        }
    }

    fn dyadic_strategy() -> impl Strategy<Value = DyadicRational> {
        (any::<u64>(), -40i64..40).prop_map(|(m, e)| DyadicRational::new(m, e).unwrap())
    }

    proptest! {
        #[test]
        fn xor_group_laws(x in dyadic_strategy(), y in dyadic_strategy(), z in dyadic_strategy()) {
            prop_assert_eq!(x.xor(&y), y.xor(&x));
            prop_assert_eq!(x.xor(&x), DyadicRational::zero());
            prop_assert_eq!(x.xor(&y).xor(&z), x.xor(&y.xor(&z)));
            prop_assert_eq!(x.xor(&y), xor_oracle(&x, &y));
        }

        #[test]
        fn clmul_matches_convolution(x in dyadic_strategy(), y in dyadic_strategy()) {
            prop_assert_eq!(x.clmul(&y), clmul_oracle(&x, &y));
            prop_assert_eq!(x.clmul(&y), y.clmul(&x));
            for k in -3..3 {
                prop_assert_eq!(x.clmul_digit(&y, k), x.clmul(&y).digit(k));
            }
        }

        #[test]
        fn clmul_distributes_over_xor(x in dyadic_strategy(), y in dyadic_strategy(), z in dyadic_strategy()) {
            prop_assert_eq!(x.clmul(&y.xor(&z)), x.clmul(&y).xor(&x.clmul(&z)));
        }

        #[test]
        fn scaling_lemma(x in dyadic_strategy(), y in dyadic_strategy(), l in -20i64..=20) {
            prop_assert_eq!(x.mul_pow2(l).clmul(&y), x.clmul(&y.mul_pow2(l)));
        }

        #[test]
        fn ordering_matches_floats(a in 0u32..1 << 20, b in 0u32..1 << 20, ea in -10i64..10, eb in -10i64..10) {
            let x = DyadicRational::new(a, ea).unwrap();
            let y = DyadicRational::new(b, eb).unwrap();
            prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
        }

        #[test]
        fn render_round_trips(x in dyadic_strategy()) {
            prop_assert_eq!(x.to_string().parse::<DyadicRational>().unwrap(), x);
        }

        #[test]
        fn walsh_product_rule(k in 0u64..1 << 12, kp in 0u64..1 << 12, j in 0u64..1 << 14) {
            let x = DyadicRational::grid(j, 14);
            let lhs = walsh_eval(k, &x).unwrap() * walsh_eval(kp, &x).unwrap();
            prop_assert_eq!(lhs, walsh_eval(k ^ kp, &x).unwrap());
        }

        #[test]
        fn walsh_periodicity(k in 0u64..1 << 10, l in 0i64..=6, j in 0u64..1 << 14) {
            let x = DyadicRational::grid(j, 14);
            let n = k << l;
            let shifted = x.xor(&DyadicRational::one().mul_pow2(-l));
            if shifted.is_below_one() {
                prop_assert_eq!(walsh_eval(n, &x).unwrap(), walsh_eval(n, &shifted).unwrap());
            }
        }

        #[test]
        fn recursion_agrees_with_character(n in 0u64..1 << 12, j in 0u64..1 << 14) {
            let x = DyadicRational::grid(j, 14);
            prop_assert_eq!(walsh_eval(n, &x).unwrap(), walsh_eval_recursive(n, &x).unwrap());
        }
    }
}
