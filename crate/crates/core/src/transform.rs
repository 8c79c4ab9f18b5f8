//! Fast Walsh–Hadamard transform and the Walsh–Fourier transform of functions
//! that are constant on the dyadic cells of `[0, 1)`.
//!
//! A [`CoefficientVector`] at bit depth `K` holds the values of `f` on the
//! cells `[j 2^-K, (j+1) 2^-K)`. Its Walsh–Fourier transform is constant on
//! the unit cells `[m, m+1)` of `[0, 2^K)` and vanishes beyond, so it is held
//! by a [`SpectrumVector`] of the same length. With `rev` the `K`-bit
//! reversal,
//!
//! ```text
//! d_m = 2^-K * sum_j c_j (-1)^popcount(m & rev(j))
//! c_j =        sum_m d_m (-1)^popcount(m & rev(j))
//! ```
//!
//! Both vectors carry a power-of-two scale so that integer inputs stay exact:
//! the stored value `v` stands for `v * 2^scale_log2`. Norms use cell
//! measure on each side, `|f|^2 = 2^-K sum c_j^2` and `|F|^2 = sum d_m^2`,
//! which makes the transform an isometry.

use std::fmt::Debug;
use std::marker::PhantomData;
use std::ops::{Add, Sub};

use num_bigint::BigUint;
use num_complex::Complex64;
use thiserror::Error;

use crate::dyadic::{DyadicRational, Sign};

/// Largest bit depth accepted by the dense and exact paths.
pub const MAX_BIT_DEPTH: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} values for bit depth {k}, got {got}")]
    LengthMismatch { k: u32, expected: usize, got: usize },
    #[error("bit depth {0} exceeds the supported maximum {MAX_BIT_DEPTH}")]
    DepthTooLarge(u32),
    #[error("index ({row}, {col}) out of range for bit depth {k}")]
    IndexOutOfRange { row: u64, col: u64, k: u32 },
    #[error("exact transform at bit depth {0} would overflow 64-bit integers")]
    Overflow(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ExactInteger,
    Floating,
}

/// Scalar types the transforms run on.
pub trait Sample:
    Copy + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;

    fn is_zero(&self) -> bool;

    /// Whether applying an unnormalized `2^k`-point butterfly stays in range.
    fn fits_butterfly(values: &[Self], k: u32) -> bool;

    /// Brings `(values, scale_log2)` to the representation the mode keeps.
    fn normalize(values: &mut [Self], scale_log2: &mut i32);
}

impl Sample for i64 {
    const MODE: Mode = Mode::ExactInteger;

    fn zero() -> Self {
        0
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn fits_butterfly(values: &[Self], k: u32) -> bool {
        let max = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        max.checked_shl(k).is_some_and(|m| m >> k == max && m <= i64::MAX as u64)
    }

    /// Strips the common power of two so that equal functions compare equal.
    fn normalize(values: &mut [Self], scale_log2: &mut i32) {
        let combined = values.iter().fold(0i64, |acc, v| acc | v);
        if combined == 0 {
            *scale_log2 = 0;
            return;
        }
        let tz = combined.trailing_zeros();
        if tz > 0 {
            values.iter_mut().for_each(|v| *v >>= tz);
            *scale_log2 += tz as i32;
        }
    }
}

impl Sample for f64 {
    const MODE: Mode = Mode::Floating;

    fn zero() -> Self {
        0.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn fits_butterfly(_values: &[Self], _k: u32) -> bool {
        true
    }

    /// Floating vectors apply their scale eagerly.
    fn normalize(values: &mut [Self], scale_log2: &mut i32) {
        if *scale_log2 != 0 {
            let factor = 2f64.powi(*scale_log2);
            values.iter_mut().for_each(|v| *v *= factor);
            *scale_log2 = 0;
        }
    }
}

macro_rules! cell_vector {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T = i64> {
            k: u32,
            scale_log2: i32,
            values: Vec<T>,
        }

        impl<T: Sample> $name<T> {
            pub fn new(k: u32, values: Vec<T>) -> Result<Self, TransformError> {
                Self::with_scale(k, values, 0)
            }

            /// Values standing for `values[i] * 2^scale_log2`.
            pub fn with_scale(k: u32, mut values: Vec<T>, mut scale_log2: i32) -> Result<Self, TransformError> {
                if k > MAX_BIT_DEPTH {
                    return Err(TransformError::DepthTooLarge(k));
                }
                let expected = 1usize << k;
                if values.len() != expected {
                    return Err(TransformError::LengthMismatch { k, expected, got: values.len() });
                }
                T::normalize(&mut values, &mut scale_log2);
                Ok($name { k, scale_log2, values })
            }

            pub fn zeros(k: u32) -> Result<Self, TransformError> {
                if k > MAX_BIT_DEPTH {
                    return Err(TransformError::DepthTooLarge(k));
                }
                Self::new(k, vec![T::zero(); 1 << k])
            }

            pub fn bit_depth(&self) -> u32 {
                self.k
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn scale_log2(&self) -> i32 {
                self.scale_log2
            }

            /// Stored values, before the power-of-two scale is applied.
            pub fn values(&self) -> &[T] {
                &self.values
            }

            pub fn into_values(self) -> Vec<T> {
                self.values
            }

            /// Indices of the nonzero cells.
            pub fn support(&self) -> Vec<usize> {
                self.values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(i, _)| i)
                    .collect()
            }

            /// Whether every cell outside `allowed` (sorted) is exactly zero.
            pub fn vanishes_off(&self, allowed: &[usize]) -> bool {
                let mut allowed = allowed.iter().peekable();
                self.values.iter().enumerate().all(|(i, v)| {
                    while allowed.next_if(|&&a| a < i).is_some() {}
                    v.is_zero() || allowed.peek() == Some(&&i)
                })
            }
        }

        impl $name<i64> {
            pub fn to_float(&self) -> $name<f64> {
                let factor = 2f64.powi(self.scale_log2);
                $name {
                    k: self.k,
                    scale_log2: 0,
                    values: self.values.iter().map(|&v| v as f64 * factor).collect(),
                }
            }

            /// Exact value on cell `i`.
            pub fn value_at(&self, i: usize) -> (i64, i32) {
                (self.values[i], self.scale_log2)
            }

            fn sum_sq_on(&self, cells: impl Iterator<Item = usize>) -> BigUint {
                cells
                    .map(|i| BigUint::from(self.values[i].unsigned_abs()).pow(2))
                    .sum()
            }
        }
    };
}

cell_vector!(
    /// Values of a function on the `2^K` dyadic cells of `[0, 1)`.
    CoefficientVector
);

cell_vector!(
    /// Values of a Walsh spectrum on the `2^K` unit cells of `[0, 2^K)`.
    SpectrumVector
);

impl CoefficientVector<i64> {
    /// `|f|^2_{L^2([0,1])}`, exactly.
    pub fn norm_sq(&self) -> DyadicRational {
        self.norm_sq_on_cells(0..self.len())
    }

    /// `|f|^2_{L^2(X)}` for `X` the union of the given cells.
    pub fn norm_sq_on_cells(&self, cells: impl IntoIterator<Item = usize>) -> DyadicRational {
        let sum = self.sum_sq_on(cells.into_iter());
        DyadicRational::new(sum, 2 * i64::from(self.scale_log2) - i64::from(self.k))
            .expect("norm exponent within range for supported depths")
    }
}

impl SpectrumVector<i64> {
    pub fn norm_sq(&self) -> DyadicRational {
        self.norm_sq_on_cells(0..self.len())
    }

    pub fn norm_sq_on_cells(&self, cells: impl IntoIterator<Item = usize>) -> DyadicRational {
        let sum = self.sum_sq_on(cells.into_iter());
        DyadicRational::new(sum, 2 * i64::from(self.scale_log2))
            .expect("norm exponent within range for supported depths")
    }
}

impl CoefficientVector<f64> {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / (1u64 << self.k) as f64
    }
}

impl SpectrumVector<f64> {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Multiplies `values` by the Sylvester–Hadamard matrix
/// `H[k][j] = (-1)^popcount(k & j)`, unnormalized.
pub fn fwht_inplace<T>(values: &mut [T]) -> Result<(), TransformError>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = values.len();
    if !n.is_power_of_two() {
        return Err(TransformError::NotPowerOfTwo(n));
    }
    let mut half = 1;
    while half < n {
        for block in values.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn bit_reverse(j: u64, k: u32) -> u64 {
    if k == 0 {
        0
    } else {
        j.reverse_bits() >> (64 - k)
    }
}

/// `W_k(j 2^-K)`, the `(k, j)` entry of the realized transform matrix.
pub fn walsh_entry(k: u64, j: u64, bits: u32) -> Result<Sign, TransformError> {
    if bits > 63 || k >> bits != 0 || j >> bits != 0 {
        return Err(TransformError::IndexOutOfRange { row: k, col: j, k: bits });
    }
    Ok(Sign::from_parity((k & bit_reverse(j, bits)).count_ones() % 2 == 1))
}

/// Reusable bit-reversal table for one bit depth. The scalar type fixes the
/// mode: `i64` is exact, `f64` floating.
#[derive(Debug, Clone)]
pub struct TransformPlan<T = i64> {
    k: u32,
    bitrev: Vec<usize>,
    _mode: PhantomData<T>,
}

impl<T: Sample> TransformPlan<T> {
    pub fn new(k: u32) -> Result<Self, TransformError> {
        if k > MAX_BIT_DEPTH {
            return Err(TransformError::DepthTooLarge(k));
        }
        let bitrev = (0..1u64 << k).map(|j| bit_reverse(j, k) as usize).collect();
        Ok(TransformPlan { k, bitrev, _mode: PhantomData })
    }

    pub fn bit_depth(&self) -> u32 {
        self.k
    }

    pub fn mode(&self) -> Mode {
        T::MODE
    }

    fn check(&self, k: u32, len: usize) -> Result<(), TransformError> {
        if k != self.k {
            return Err(TransformError::LengthMismatch {
                k: self.k,
                expected: 1 << self.k,
                got: len,
            });
        }
        Ok(())
    }

    pub fn permute(&self, values: &[T]) -> Vec<T> {
        self.bitrev.iter().map(|&r| values[r]).collect()
    }

    pub fn forward(&self, c: &CoefficientVector<T>) -> Result<SpectrumVector<T>, TransformError> {
        self.check(c.k, c.len())?;
        if !T::fits_butterfly(&c.values, self.k) {
            return Err(TransformError::Overflow(self.k));
        }
        let mut values = self.permute(&c.values);
        fwht_inplace(&mut values)?;
        SpectrumVector::with_scale(self.k, values, c.scale_log2 - self.k as i32)
    }

    pub fn inverse(&self, d: &SpectrumVector<T>) -> Result<CoefficientVector<T>, TransformError> {
        self.check(d.k, d.len())?;
        if !T::fits_butterfly(&d.values, self.k) {
            return Err(TransformError::Overflow(self.k));
        }
        let mut values = d.values.clone();
        fwht_inplace(&mut values)?;
        CoefficientVector::with_scale(self.k, self.permute(&values), d.scale_log2)
    }
}

pub fn walsh_forward<T: Sample>(c: &CoefficientVector<T>) -> Result<SpectrumVector<T>, TransformError> {
    TransformPlan::new(c.bit_depth())?.forward(c)
}

pub fn walsh_inverse<T: Sample>(d: &SpectrumVector<T>) -> Result<CoefficientVector<T>, TransformError> {
    TransformPlan::new(d.bit_depth())?.inverse(d)
}

/// The orthogonal matrix `2^(-K/2) H_rev` applied to a complex vector, in
/// orthonormal cell coordinates. It is symmetric, hence its own adjoint.
pub fn walsh_unitary_apply(values: &[Complex64]) -> Result<Vec<Complex64>, TransformError> {
    let n = values.len();
    if !n.is_power_of_two() {
        return Err(TransformError::NotPowerOfTwo(n));
    }
    let k = n.trailing_zeros();
    let mut out: Vec<Complex64> = (0..n as u64)
        .map(|j| values[bit_reverse(j, k) as usize])
        .collect();
    fwht_inplace(&mut out)?;
    let scale = (n as f64).sqrt().recip();
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `e^(-2 pi i j k / N)`.
    Forward,
    /// Kernel `e^(+2 pi i j k / N)`.
    Inverse,
}

/// Unitary DFT, `N^(-1/2) sum_j x_j e^(∓2 pi i j k / N)`.
///
/// Powers of two go through an iterative radix-2 kernel, everything else
/// through the direct `O(N^2)` sum with an exact `jk mod N` twiddle index.
pub fn dft_apply(values: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let twiddles: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * t as f64 / n as f64))
        .collect();
    let mut out = if n.is_power_of_two() {
        radix2(values, &twiddles)
    } else {
        (0..n)
            .map(|k| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x * twiddles[(j * k) % n])
                    .sum()
            })
            .collect()
    };
    let scale = (n as f64).sqrt().recip();
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

fn radix2(values: &[Complex64], twiddles: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let bits = n.trailing_zeros();
    let mut a: Vec<Complex64> = (0..n as u64)
        .map(|j| values[bit_reverse(j, bits) as usize])
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for block in a.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(len / 2);
            for (i, (x, y)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *y * twiddles[i * stride];
                let u = *x;
                *x = u + t;
                *y = u - t;
            }
        }
        len *= 2;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{walsh_eval, walsh_eval_recursive};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hadamard_dense(k: u32) -> Vec<Vec<i64>> {
        let n = 1u64 << k;
        (0..n)
            .map(|r| (0..n).map(|c| if (r & c).count_ones() % 2 == 0 { 1 } else { -1 }).collect())
            .collect()
    }

    /// Dense `H_rev` built from the recursive Walsh evaluator, independent of
    /// the bit-reversal formula.
    fn walsh_matrix_from_recursion(k: u32) -> Vec<Vec<i64>> {
        let n = 1u64 << k;
        (0..n)
            .map(|m| {
                (0..n)
                    .map(|j| walsh_eval_recursive(m, &DyadicRational::grid(j, k)).unwrap().value())
                    .collect()
            })
            .collect()
    }

    fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
        m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn random_ints(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
        (0..n).map(|_| rng.random_range(-1000..=1000)).collect()
    }

    #[test]
    fn founding_oracle_discretization_matches_recursion() {
        for k in 0..=6 {
            let dense = walsh_matrix_from_recursion(k);
            for m in 0..1u64 << k {
                for j in 0..1u64 << k {
                    assert_eq!(walsh_entry(m, j, k).unwrap().value(), dense[m as usize][j as usize]);
                }
            }
        }
    }

    #[test]
    fn fwht_examples() {
        let mut v = vec![7i64];
        fwht_inplace(&mut v).unwrap();
        assert_eq!(v, vec![7]);
        let mut v = vec![1i64, 0, 0, 0];
        fwht_inplace(&mut v).unwrap();
        assert_eq!(v, vec![1, 1, 1, 1]);
        assert_eq!(fwht_inplace(&mut [1i64, 2, 3]), Err(TransformError::NotPowerOfTwo(3)));
    }

    #[test]
    fn fwht_twice_scales_by_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=12 {
            let original = random_ints(&mut rng, 1 << k);
            let mut v = original.clone();
            fwht_inplace(&mut v).unwrap();
            if k <= 8 {
                assert_eq!(v, mat_vec(&hadamard_dense(k), &original));
            }
            fwht_inplace(&mut v).unwrap();
            let expected: Vec<i64> = original.iter().map(|x| x << k).collect();
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn walsh_entry_examples() {
        for j in 0..16 {
            assert_eq!(walsh_entry(0, j, 4).unwrap(), Sign::Plus);
            assert_eq!(walsh_entry(j, 0, 4).unwrap(), Sign::Plus);
        }
        assert_eq!(walsh_entry(2, 1, 2).unwrap(), Sign::Minus);
        assert_eq!(walsh_eval(2, &DyadicRational::from_f64(0.25).unwrap()).unwrap(), Sign::Minus);
        assert!(walsh_entry(4, 0, 2).is_err());
        assert!(walsh_entry(0, 4, 2).is_err());
    }

    #[test]
    fn walsh_entry_symmetric_and_consistent() {
        for k in 0..=6 {
            for a in 0..1u64 << k {
                for b in 0..1u64 << k {
                    assert_eq!(walsh_entry(a, b, k), walsh_entry(b, a, k));
                }
            }
        }
        for k in 0..=8 {
            for m in 0..1u64 << k {
                for j in 0..1u64 << k {
                    let x = DyadicRational::grid(j, k);
                    assert_eq!(walsh_entry(m, j, k).unwrap(), walsh_eval(m, &x).unwrap());
                }
            }
        }
    }

    #[test]
    fn walsh_matrix_orthogonal() {
        for k in 0..=8u32 {
            let n = 1u64 << k;
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|m| (0..n).map(|j| walsh_entry(m, j, k).unwrap().value()).collect())
                .collect();
            for a in 0..n as usize {
                for b in 0..n as usize {
                    let dot: i64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y).sum();
                    assert_eq!(dot, if a == b { n as i64 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn forward_of_constant_is_delta() {
        for k in 0..=10 {
            let c = CoefficientVector::new(k, vec![1i64; 1 << k]).unwrap();
            let d = walsh_forward(&c).unwrap();
            let mut expected = vec![0i64; 1 << k];
            expected[0] = 1;
            assert_eq!(d, SpectrumVector::new(k, expected).unwrap());
            assert_eq!(walsh_inverse(&d).unwrap(), c);
        }
    }

    #[test]
    fn forward_of_cell_indicator_is_scaled_walsh() {
        let k = 5;
        for cell in 0..1u64 << k {
            let mut values = vec![0i64; 1 << k];
            values[cell as usize] = 1;
            let d = walsh_forward(&CoefficientVector::new(k, values).unwrap()).unwrap();
            let expected: Vec<i64> = (0..1u64 << k)
                .map(|m| walsh_eval(cell, &DyadicRational::grid(m, k)).unwrap().value())
                .collect();
            assert_eq!(d, SpectrumVector::with_scale(k, expected, -(k as i32)).unwrap());
        }
    }

    #[test]
    fn forward_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..=9 {
            let dense = walsh_matrix_from_recursion(k);
            let c = random_ints(&mut rng, 1 << k);
            let d = walsh_forward(&CoefficientVector::new(k, c.clone()).unwrap()).unwrap();
            let expected = SpectrumVector::with_scale(k, mat_vec(&dense, &c), -(k as i32)).unwrap();
            assert_eq!(d, expected);
        }
    }

    #[test]
    fn inverse_unit_cell_pattern() {
        let d = SpectrumVector::new(2, vec![1i64, 0, 1, 0]).unwrap();
        let c = walsh_inverse(&d).unwrap();
        assert_eq!(c, CoefficientVector::with_scale(2, vec![2, 0, 2, 0], 0).unwrap());
        assert_eq!(c.support(), vec![0, 2]);
    }

    #[test]
    fn exact_round_trip_up_to_depth_14() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..=14 {
            let c = CoefficientVector::new(k, random_ints(&mut rng, 1 << k)).unwrap();
            let back = walsh_inverse(&walsh_forward(&c).unwrap()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn exact_overflow_is_reported() {
        let c = CoefficientVector::new(4, vec![i64::MAX / 4; 16]).unwrap();
        assert_eq!(walsh_forward(&c), Err(TransformError::Overflow(4)));
    }

    #[test]
    fn floating_mode_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = CoefficientVector::new(6, random_ints(&mut rng, 64)).unwrap();
        let exact = walsh_forward(&c).unwrap().to_float();
        let plan = TransformPlan::<f64>::new(6).unwrap();
        assert_eq!(plan.mode(), Mode::Floating);
        let float = plan.forward(&c.to_float()).unwrap();
        for (a, b) in exact.values().iter().zip(float.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((float.norm_sq() - c.to_float().norm_sq()).abs() < 1e-6);
    }

    #[test]
    fn vanishes_off_respects_allowed_cells() {
        let c = CoefficientVector::new(2, vec![1i64, 0, 3, 0]).unwrap();
        assert!(c.vanishes_off(&[0, 2]));
        assert!(c.vanishes_off(&[0, 1, 2]));
        assert!(!c.vanishes_off(&[0, 3]));
        assert!(!c.vanishes_off(&[]));
    }

    #[test]
    fn length_checks() {
        assert!(matches!(
            CoefficientVector::new(2, vec![1i64; 3]),
            Err(TransformError::LengthMismatch { .. })
        ));
        assert_eq!(CoefficientVector::<i64>::zeros(25), Err(TransformError::DepthTooLarge(25)));
    }

    fn dense_dft(values: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let n = values.len();
        let sign = if direction == Direction::Forward { -1.0 } else { 1.0 };
        (0..n)
            .map(|k| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let angle = sign * 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                        x * Complex64::from_polar(1.0, angle)
                    })
                    .sum::<Complex64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn dft_examples() {
        let x = vec![Complex64::new(2.5, -1.0)];
        assert_eq!(dft_apply(&x, Direction::Forward), x);
        for n in [5usize, 8, 12] {
            let mut delta = vec![Complex64::new(0.0, 0.0); n];
            delta[0] = Complex64::new(1.0, 0.0);
            for v in dft_apply(&delta, Direction::Forward) {
                assert!((v.norm() - (n as f64).sqrt().recip()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dft_round_trip_and_radix2_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2, 3, 7, 64, 243, 1000, 1024, 4096] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let forward = dft_apply(&x, Direction::Forward);
            let back = dft_apply(&forward, Direction::Inverse);
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).norm() < 1e-12, "n = {n}");
            }
            if n <= 1024 {
                for (a, b) in forward.iter().zip(dense_dft(&x, Direction::Forward)) {
                    assert!((a - b).norm() < 1e-10, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn unitary_walsh_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x: Vec<Complex64> = (0..128).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.5)).collect();
        let back = walsh_unitary_apply(&walsh_unitary_apply(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn parseval_exact(k in 0u32..=10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = CoefficientVector::new(k, random_ints(&mut rng, 1 << k)).unwrap();
            let d = walsh_forward(&c).unwrap();
            prop_assert_eq!(d.norm_sq(), c.norm_sq());
            prop_assert_eq!(walsh_inverse(&d).unwrap(), c);
        }
    }
}
