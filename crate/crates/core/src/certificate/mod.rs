//! Explicit functions supported on `X_n` whose Walsh spectrum is supported
//! on `Y_n`.
//!
//! The family is built on the spectrum side. At level one it consists of the
//! `2^(m2-m1)` patterns that are `2^m2`-periodic, constant on unit cells and
//! live on the multiples of `2^m1`. Level `n` multiplies the dilate
//! `G(y / L)` of every level-`(n-1)` vector with every level-one pattern,
//! which keeps the support inside `L Y_(n-1) ∩ Z_n = Y_n`. The exact inverse
//! transform then carries each vector back to a function on `[0, 1)`, where
//! the support on `X_n` is checked cell by cell.

pub mod rank;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::DyadicRational;
use crate::fractal::{FractalError, FractalParams};
use crate::transform::{
    walsh_entry, CoefficientVector, SpectrumVector, TransformError, TransformPlan, MAX_BIT_DEPTH,
};
use rank::{certify_rank, RankCertificate};

/// Largest bit depth for the null-space and membership computations.
pub const MAX_EXACT_DEPTH: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error(transparent)]
    Fractal(#[from] FractalError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("bit depth {got} exceeds the limit {limit}")]
    SizeCap { got: u32, limit: u32 },
    #[error("vector {vector} is nonzero on {side} cell {cell}, outside the set")]
    SupportViolation { vector: usize, side: &'static str, cell: usize },
    #[error("vectors do not have the expected length {0}")]
    LevelMismatch(usize),
    #[error("rank cross-check disagrees: {0:?}")]
    RankMismatch(RankCertificate),
}

/// `2^(m2 - m1)` level-one patterns on the unit cells of `[0, L)`.
pub fn base_basis(m1: u32, m2: u32) -> Vec<SpectrumVector<i64>> {
    if m2 < m1 || m1 == 0 {
        return Vec::new();
    }
    let k = m1 + m2;
    let period = 1usize << m2;
    (0..1usize << (m2 - m1))
        .map(|w| {
            let residue = w << m1;
            let values = (0..1usize << k).map(|t| i64::from(t % period == residue)).collect();
            SpectrumVector::new(k, values).expect("level-one depth is small")
        })
        .collect()
}

/// Products `G(y / L) h(y)` of each level-`(n-1)` vector with each level-one
/// pattern, in lexicographic order `(g, h)`.
pub fn lift_basis(prev: &[SpectrumVector<i64>], m1: u32, m2: u32) -> Result<Vec<SpectrumVector<i64>>, CertificateError> {
    let patterns = base_basis(m1, m2);
    let Some(first) = prev.first() else {
        return Ok(Vec::new());
    };
    let digit_bits = m1 + m2;
    let k = first.bit_depth() + digit_bits;
    if k > MAX_BIT_DEPTH {
        return Err(CertificateError::SizeCap { got: k, limit: MAX_BIT_DEPTH });
    }
    if prev.iter().any(|g| g.bit_depth() != first.bit_depth()) {
        return Err(CertificateError::LevelMismatch(first.len()));
    }
    let period = 1usize << m2;
    let mut out = Vec::with_capacity(prev.len() * patterns.len());
    for g in prev {
        let coarse = g.values();
        for h in &patterns {
            let fine = h.values();
            let values = (0..1usize << k)
                .map(|t| coarse[t >> digit_bits] * fine[t % period])
                .collect();
            out.push(SpectrumVector::with_scale(k, values, g.scale_log2() + h.scale_log2())?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEntry {
    /// `(w_1, ..., w_n)`, the level-one pattern chosen at each level.
    pub multi_index: Vec<u32>,
    pub x_support_size: usize,
    /// `|f|^2_{L^2(X_n)} / |f|^2_{L^2([0,1])}` as an exact fraction.
    pub norm_ratio: String,
    #[serde(skip)]
    pub norm_sq_on_x: DyadicRational,
    #[serde(skip)]
    pub norm_sq_full: DyadicRational,
    #[serde(skip)]
    pub spectrum_norm_sq_on_y: DyadicRational,
}

impl WitnessEntry {
    /// `|f|_{L^2(X_n)} = |f|_{L^2([0,1])} = |F|_{L^2(Y_n)}`, exactly.
    pub fn norms_agree(&self) -> bool {
        self.norm_sq_on_x == self.norm_sq_full && self.norm_sq_full == self.spectrum_norm_sq_on_y
    }
}

#[derive(Debug, Clone)]
pub struct BasisFamily {
    pub params: FractalParams,
    pub y_side: Vec<SpectrumVector<i64>>,
    pub x_side: Vec<CoefficientVector<i64>>,
    pub construction: Vec<Vec<u32>>,
    pub witnesses: Vec<WitnessEntry>,
}

impl BasisFamily {
    pub fn build(params: FractalParams) -> Result<Self, CertificateError> {
        let FractalParams { m1, m2, n } = params;
        if params.bit_depth() > MAX_BIT_DEPTH {
            return Err(CertificateError::SizeCap { got: params.bit_depth(), limit: MAX_BIT_DEPTH });
        }
        let mut y_side = base_basis(m1, m2);
        let level_one = y_side.len() as u32;
        let mut construction: Vec<Vec<u32>> = (0..level_one).map(|w| vec![w]).collect();
        for _ in 2..=n {
            y_side = lift_basis(&y_side, m1, m2)?;
            construction = construction
                .iter()
                .flat_map(|prefix| {
                    (0..level_one).map(move |w| {
                        let mut next = prefix.clone();
                        next.push(w);
                        next
                    })
                })
                .collect();
        }
        let (x_side, mut witnesses) = xside_witnesses(&y_side, params)?;
        for (entry, index) in witnesses.iter_mut().zip(&construction) {
            entry.multi_index = index.clone();
        }
        Ok(BasisFamily { params, y_side, x_side, construction, witnesses })
    }

    pub fn len(&self) -> usize {
        self.y_side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_side.is_empty()
    }

    pub fn rank(&self) -> Result<usize, CertificateError> {
        checked_rank(&family_rows(&self.y_side))
    }
}

fn family_rows(vectors: &[SpectrumVector<i64>]) -> Vec<Vec<i64>> {
    // only columns where some vector is nonzero can carry rank
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let live: Vec<usize> = (0..first.len())
        .filter(|&t| vectors.iter().any(|v| v.values()[t] != 0))
        .collect();
    vectors
        .iter()
        .map(|v| live.iter().map(|&t| v.values()[t]).collect())
        .collect()
}

fn checked_rank(rows: &[Vec<i64>]) -> Result<usize, CertificateError> {
    let cert = certify_rank(rows);
    if cert.consistent() {
        Ok(cert.rank)
    } else {
        Err(CertificateError::RankMismatch(cert))
    }
}

fn dyadic_to_rational(x: &DyadicRational) -> BigRational {
    let m = BigInt::from(x.mantissa().clone());
    let e = x.exponent();
    let pow = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(m * pow)
    } else {
        BigRational::new(m, pow)
    }
}

fn ratio_string(num: &DyadicRational, den: &DyadicRational) -> String {
    if num == den {
        return "1".to_string();
    }
    if den.is_zero() {
        return "undefined".to_string();
    }
    let r = dyadic_to_rational(num) / dyadic_to_rational(den);
    if r.is_integer() {
        r.numer().abs().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Inverse-transforms each spectrum vector exactly and checks both supports.
pub fn xside_witnesses(
    y_basis: &[SpectrumVector<i64>],
    params: FractalParams,
) -> Result<(Vec<CoefficientVector<i64>>, Vec<WitnessEntry>), CertificateError> {
    if y_basis.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let k = params.bit_depth();
    if k > MAX_BIT_DEPTH {
        return Err(CertificateError::SizeCap { got: k, limit: MAX_BIT_DEPTH });
    }
    let x_cells = params.x_set()?.dense_indices(1 << MAX_BIT_DEPTH)?;
    let y_cells = params.y_set()?.dense_indices(1 << MAX_BIT_DEPTH)?;
    let plan = TransformPlan::<i64>::new(k)?;
    let mut x_side = Vec::with_capacity(y_basis.len());
    let mut entries = Vec::with_capacity(y_basis.len());
    for (vector, y) in y_basis.iter().enumerate() {
        if y.bit_depth() != k {
            return Err(CertificateError::LevelMismatch(1 << k));
        }
        if let Some(cell) = first_outside(y.values(), &y_cells) {
            return Err(CertificateError::SupportViolation { vector, side: "spectrum", cell });
        }
        let f = plan.inverse(y)?;
        if let Some(cell) = first_outside(f.values(), &x_cells) {
            return Err(CertificateError::SupportViolation { vector, side: "function", cell });
        }
        let norm_sq_on_x = f.norm_sq_on_cells(x_cells.iter().copied());
        let norm_sq_full = f.norm_sq();
        let spectrum_norm_sq_on_y = y.norm_sq_on_cells(y_cells.iter().copied());
        entries.push(WitnessEntry {
            multi_index: Vec::new(),
            x_support_size: f.support().len(),
            norm_ratio: ratio_string(&norm_sq_on_x, &norm_sq_full),
            norm_sq_on_x,
            norm_sq_full,
            spectrum_norm_sq_on_y,
        });
        x_side.push(f);
    }
    Ok((x_side, entries))
}

fn first_outside(values: &[i64], allowed: &[usize]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .find(|(i, v)| **v != 0 && allowed.binary_search(i).is_err())
        .map(|(i, _)| i)
}

/// `dim V_{X_n, Y_n}`: the nullity of the Walsh matrix restricted to rows
/// off `Y_n` and columns on `X_n`.
pub fn exact_dimension(params: FractalParams) -> Result<u64, CertificateError> {
    let k = params.bit_depth();
    if k > MAX_EXACT_DEPTH {
        return Err(CertificateError::SizeCap { got: k, limit: MAX_EXACT_DEPTH });
    }
    let x_cells = params.x_set()?.dense_indices(1 << MAX_EXACT_DEPTH)?;
    let y_cells = params.y_set()?.dense_indices(1 << MAX_EXACT_DEPTH)?;
    let mut rows = Vec::with_capacity((1usize << k) - y_cells.len());
    for m in (0..1usize << k).filter(|m| y_cells.binary_search(m).is_err()) {
        let row = x_cells
            .iter()
            .map(|&j| walsh_entry(m as u64, j as u64, k).map(|s| s.value()))
            .collect::<Result<Vec<i64>, _>>()?;
        rows.push(row);
    }
    let rank = checked_rank(&rows)?;
    Ok((x_cells.len() - rank) as u64)
}

/// Whether the inverse transform of the unit-cell indicator of `Y_n`
/// vanishes off `X_n`.
pub fn indicator_membership_check(params: FractalParams) -> Result<bool, CertificateError> {
    let k = params.bit_depth();
    if k > MAX_EXACT_DEPTH {
        return Err(CertificateError::SizeCap { got: k, limit: MAX_EXACT_DEPTH });
    }
    let x_cells = params.x_set()?.dense_indices(1 << MAX_EXACT_DEPTH)?;
    let y_cells = params.y_set()?.dense_indices(1 << MAX_EXACT_DEPTH)?;
    let mut values = vec![0i64; 1 << k];
    for &t in &y_cells {
        values[t] = 1;
    }
    let f = TransformPlan::<i64>::new(k)?.inverse(&SpectrumVector::new(k, values)?)?;
    Ok(f.vanishes_off(&x_cells))
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub params: FractalParams,
    /// `2^(n(m2-m1))` when `m2 >= m1`; zero (no claim) otherwise.
    pub claimed_lower_bound: u64,
    pub constructed_count: usize,
    #[serde(rename = "rank")]
    pub rank_of_constructed: usize,
    pub exact_dimension: Option<u64>,
    pub indicator_member: bool,
    pub witnesses: Vec<WitnessEntry>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        let count_ok = self.constructed_count as u64 == self.claimed_lower_bound;
        let rank_ok = self.rank_of_constructed == self.constructed_count;
        let dim_ok = self.exact_dimension.is_none_or(|d| d >= self.claimed_lower_bound);
        let norms_ok = self.witnesses.iter().all(|w| w.norms_agree() && w.norm_ratio == "1");
        let indicator_ok = !self.params.is_critical_regime() || self.indicator_member;
        count_ok && rank_ok && dim_ok && norms_ok && indicator_ok
    }
}

pub fn claimed_lower_bound(params: FractalParams) -> u64 {
    if params.is_critical_regime() {
        1 << (params.n * (params.m2 - params.m1))
    } else {
        0
    }
}

/// Builds the family, certifies its rank and optionally the exact dimension.
pub fn certify(params: FractalParams, with_exact_dimension: bool) -> Result<CertificateReport, CertificateError> {
    let family = BasisFamily::build(params)?;
    let rank_of_constructed = family.rank()?;
    let exact = if with_exact_dimension { Some(exact_dimension(params)?) } else { None };
    let indicator_member = if params.bit_depth() <= MAX_EXACT_DEPTH {
        indicator_membership_check(params)?
    } else {
        false
    };
    Ok(CertificateReport {
        params,
        claimed_lower_bound: claimed_lower_bound(params),
        constructed_count: family.len(),
        rank_of_constructed,
        exact_dimension: exact,
        indicator_member,
        witnesses: family.witnesses,
    })
}
