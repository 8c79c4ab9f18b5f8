//! Digit-alphabet Cantor sets and their regularity.
//!
//! A level-`n` set in base `b` is a union of cells indexed by the `n`-digit
//! base-`b` strings whose digits all come from an alphabet. On the fine side
//! the cells have width `b^-n` inside `[0, 1]`; on the unit side they are the
//! unit cells of `[0, b^n]`. The fine-side measure gives each cell mass
//! `1/#cells`; the unit side carries its dilate, scaled so that a cell of
//! length one has mass one. `X_n` and `Y_n = L^n X_n` are the special case
//! `b = L = 2^(m1+m2)`, alphabet `{k 2^m1 : k < 2^m2}`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Most cells a construction may produce.
pub const MAX_CELLS: usize = 1 << 24;
/// Largest resolution `b^n` the regularity scan will lay out densely.
pub const MAX_DENSE_RESOLUTION: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractalError {
    #[error("m1, m2 and n must all be at least 1 (got m1={m1}, m2={m2}, n={n})")]
    InvalidParams { m1: u32, m2: u32, n: u32 },
    #[error("bit depth {0} is too large")]
    DepthTooLarge(u64),
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("digit alphabet is empty")]
    EmptyAlphabet,
    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u64, base: u64 },
    #[error("digit selector returned {got} digits where {expected} were expected")]
    UnevenSelection { expected: usize, got: usize },
    #[error("construction would produce more than {MAX_CELLS} cells")]
    TooManyCells,
    #[error("resolution {0} exceeds the dense limit")]
    ResolutionTooLarge(BigUint),
    #[error("cell indices must be strictly increasing and below the resolution")]
    InvalidIndices,
    #[error("no dyadic scale lies in [{alpha0}, {alpha1}] at or above the cell width {width}")]
    EmptyScaleRange { alpha0: f64, alpha1: f64, width: f64 },
    #[error("cell set is empty")]
    EmptySet,
}

/// `(m1, m2, n)` of the construction, with `L = 2^(m1+m2)`, `M = 2^m2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FractalParams {
    pub m1: u32,
    pub m2: u32,
    pub n: u32,
}

impl FractalParams {
    pub fn new(m1: u32, m2: u32, n: u32) -> Result<Self, FractalError> {
        if m1 == 0 || m2 == 0 || n == 0 {
            return Err(FractalError::InvalidParams { m1, m2, n });
        }
        let k = u64::from(n) * u64::from(m1 + m2);
        if k > 62 {
            return Err(FractalError::DepthTooLarge(k));
        }
        Ok(FractalParams { m1, m2, n })
    }

    pub fn digit_bits(&self) -> u32 {
        self.m1 + self.m2
    }

    /// `L = 2^(m1+m2)`.
    pub fn base(&self) -> u64 {
        1 << self.digit_bits()
    }

    /// `M = 2^m2`.
    pub fn digits_per_level(&self) -> u64 {
        1 << self.m2
    }

    /// `K = n (m1 + m2)`, so that `L^n = 2^K`.
    pub fn bit_depth(&self) -> u32 {
        self.n * self.digit_bits()
    }

    /// `N = L^n`.
    pub fn resolution(&self) -> u64 {
        1 << self.bit_depth()
    }

    /// `delta = m2 / (m1 + m2) = log M / log L`.
    pub fn delta(&self) -> f64 {
        f64::from(self.m2) / f64::from(self.digit_bits())
    }

    /// Whether `delta >= 1/2`, the regime where a nontrivial counterexample
    /// space exists.
    pub fn is_critical_regime(&self) -> bool {
        self.m2 >= self.m1
    }

    /// `{k 2^m1 : 0 <= k < 2^m2}`.
    pub fn alphabet(&self) -> Vec<u64> {
        (0..self.digits_per_level()).map(|k| k << self.m1).collect()
    }

    pub fn with_level(&self, n: u32) -> Result<Self, FractalError> {
        Self::new(self.m1, self.m2, n)
    }

    pub fn x_set(&self) -> Result<CellSet, FractalError> {
        build_cantor_cells(self.base(), &self.alphabet(), self.n, Side::Fine)
    }

    pub fn y_set(&self) -> Result<CellSet, FractalError> {
        build_cantor_cells(self.base(), &self.alphabet(), self.n, Side::Unit)
    }
}

impl fmt::Display for FractalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m1={} m2={} n={}", self.m1, self.m2, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Cells of width `b^-n` in `[0, 1]`.
    Fine,
    /// Unit cells in `[0, b^n]`.
    Unit,
    /// Point masses at `index * b^-n`, no Lebesgue measure.
    Points,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Fine => "fine",
            Side::Unit => "unit",
            Side::Points => "points",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    side: Side,
    base: u64,
    level: u32,
    indices: Vec<BigUint>,
    measure_per_cell: BigRational,
    alphabet: Option<Vec<u64>>,
}

impl CellSet {
    /// A set from explicit cell indices, carrying the side's natural measure.
    pub fn from_indices(side: Side, base: u64, level: u32, indices: Vec<BigUint>) -> Result<Self, FractalError> {
        if base < 2 {
            return Err(FractalError::InvalidBase(base));
        }
        let resolution = BigUint::from(base).pow(level);
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || indices.last().is_some_and(|last| *last >= resolution) {
            return Err(FractalError::InvalidIndices);
        }
        let measure_per_cell = match (side, indices.len()) {
            (_, 0) => BigRational::zero(),
            (Side::Unit, _) => BigRational::one(),
            (_, count) => BigRational::new(BigUint::one().into(), BigUint::from(count).into()),
        };
        Ok(CellSet { side, base, level, indices, measure_per_cell, alphabet: None })
    }

    /// Point masses at `index * base^-level`.
    pub fn points(base: u64, level: u32, indices: Vec<u64>) -> Result<Self, FractalError> {
        Self::from_indices(Side::Points, base, level, indices.into_iter().map(BigUint::from).collect())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn indices(&self) -> &[BigUint] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn measure_per_cell(&self) -> &BigRational {
        &self.measure_per_cell
    }

    /// The single alphabet the set was built from, if any.
    pub fn alphabet(&self) -> Option<&[u64]> {
        self.alphabet.as_deref()
    }

    /// `base^level`, the number of cell slots.
    pub fn resolution(&self) -> BigUint {
        BigUint::from(self.base).pow(self.level)
    }

    /// `K` with `base^level = 2^K`, when the base is a power of two.
    pub fn bit_depth(&self) -> Option<u32> {
        self.base
            .is_power_of_two()
            .then(|| self.level * self.base.trailing_zeros())
    }

    /// Width of one cell in absolute units.
    pub fn cell_width(&self) -> BigRational {
        match self.side {
            Side::Unit => BigRational::one(),
            Side::Fine | Side::Points => {
                BigRational::new(BigUint::one().into(), self.resolution().into())
            }
        }
    }

    pub fn total_mass(&self) -> BigRational {
        &self.measure_per_cell * BigRational::from_integer(BigUint::from(self.len()).into())
    }

    /// Indices as `usize`, refusing resolutions above `cap`.
    pub fn dense_indices(&self, cap: u64) -> Result<Vec<usize>, FractalError> {
        let resolution = self.resolution();
        if resolution > BigUint::from(cap) {
            return Err(FractalError::ResolutionTooLarge(resolution));
        }
        Ok(self
            .indices
            .iter()
            .map(|i| i.to_usize().expect("index below a usize-sized resolution"))
            .collect())
    }

    pub fn contains(&self, index: &BigUint) -> bool {
        self.indices.binary_search(index).is_ok()
    }
}

impl Serialize for CellSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CellSet", 6)?;
        s.serialize_field("side", &self.side)?;
        s.serialize_field("base", &self.base)?;
        s.serialize_field("level", &self.level)?;
        s.serialize_field("K", &self.bit_depth())?;
        let indices: Vec<String> = self.indices.iter().map(|i| i.to_str_radix(10)).collect();
        s.serialize_field("indices", &indices)?;
        s.serialize_field("measure_per_cell", &format_ratio(&self.measure_per_cell))?;
        s.end()
    }
}

/// `p/q`, always with an explicit denominator.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// All `n`-digit base-`base` strings over `alphabet`, as cell indices.
pub fn build_cantor_cells(base: u64, alphabet: &[u64], n: u32, side: Side) -> Result<CellSet, FractalError> {
    let mut digits = alphabet.to_vec();
    digits.sort_unstable();
    digits.dedup();
    let mut set = build_cantor_cells_by(base, n, side, |_, _| digits.clone())?;
    set.alphabet = Some(digits);
    Ok(set)
}

/// General construction: `select(level, parent)` chooses the digits
/// appended below the cell `parent` of the previous level (`level` starts at
/// 1 with parent 0). Every selection must have the same size.
pub fn build_cantor_cells_by<F>(base: u64, n: u32, side: Side, mut select: F) -> Result<CellSet, FractalError>
where
    F: FnMut(u32, &BigUint) -> Vec<u64>,
{
    if base < 2 {
        return Err(FractalError::InvalidBase(base));
    }
    let mut cells = vec![BigUint::zero()];
    let mut width = None;
    for level in 1..=n {
        let mut next = Vec::new();
        for parent in &cells {
            let mut digits = select(level, parent);
            digits.sort_unstable();
            digits.dedup();
            if digits.is_empty() {
                return Err(FractalError::EmptyAlphabet);
            }
            if let Some(&digit) = digits.iter().find(|&&d| d >= base) {
                return Err(FractalError::DigitOutOfRange { digit, base });
            }
            match width {
                None => width = Some(digits.len()),
                Some(w) if w != digits.len() => {
                    return Err(FractalError::UnevenSelection { expected: w, got: digits.len() })
                }
                _ => {}
            }
            if cells.len().saturating_mul(digits.len()) > MAX_CELLS {
                return Err(FractalError::TooManyCells);
            }
            let scaled = parent * base;
            next.extend(digits.iter().map(|&d| &scaled + d));
        }
        cells = next;
    }
    CellSet::from_indices(side, base, n, cells)
}

/// Scales from one cell to the whole range: `[N^-1, 1]` for fine cells,
/// `[1, N]` otherwise.
pub fn natural_scale_range(s: &CellSet) -> (f64, f64) {
    let resolution = s.resolution().to_f64().unwrap_or(f64::INFINITY);
    match s.side {
        Side::Fine => (resolution.recip(), 1.0),
        _ => (1.0, resolution),
    }
}

/// `|X|`: cell count times cell width; point sets are null.
pub fn lebesgue_measure(s: &CellSet) -> BigRational {
    match s.side {
        Side::Points => BigRational::zero(),
        _ => s.cell_width() * BigRational::from_integer(BigUint::from(s.len()).into()),
    }
}

/// An interval attaining one of the reported extremal ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub start: f64,
    pub length: f64,
    pub mass: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub delta: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// Interval lengths scanned, all powers of two.
    pub scales: Vec<f64>,
    /// Smallest `C` with `mu(I) <= C |I|^delta` over the scanned windows.
    pub c_upper: f64,
    /// Smallest `C` with `mu(I) >= |I|^delta / C` over the scanned centered intervals.
    pub c_lower: f64,
    /// `max(1, c_upper, c_lower)`.
    pub c_r: f64,
    /// The constant over all intervals lies in `[c_r, bracket_factor * c_r]`.
    pub bracket_factor: f64,
    pub upper_witness: Option<Witness>,
    pub lower_witness: Option<Witness>,
}

/// Cumulative mass in cell units.
struct MassProfile {
    prefix: Vec<u32>,
    atoms: bool,
    mass_per_cell: f64,
    width: f64,
}

impl MassProfile {
    fn new(s: &CellSet) -> Result<Self, FractalError> {
        let cells = s.dense_indices(MAX_DENSE_RESOLUTION)?;
        let n = s.resolution().to_usize().expect("checked against the dense cap");
        let mut occupied = vec![0u32; n];
        for i in cells {
            occupied[i] = 1;
        }
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0);
        for o in occupied {
            prefix.push(prefix.last().unwrap() + o);
        }
        Ok(MassProfile {
            prefix,
            atoms: s.side == Side::Points,
            mass_per_cell: s.measure_per_cell.to_f64().unwrap_or(0.0),
            width: s.cell_width().to_f64().unwrap_or(0.0),
        })
    }

    fn cells(&self) -> usize {
        self.prefix.len() - 1
    }

    fn count_below(&self, x: f64) -> f64 {
        let n = self.cells();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= n as f64 {
            return f64::from(self.prefix[n]);
        }
        let i = x.floor() as usize;
        let inside = f64::from(self.prefix[i + 1] - self.prefix[i]);
        f64::from(self.prefix[i]) + (x - i as f64) * inside
    }

    fn atoms_in(&self, a: f64, b: f64) -> f64 {
        let n = self.cells() as f64;
        let lo = a.ceil().max(0.0);
        let hi = b.floor().min(n - 1.0);
        if hi < lo {
            return 0.0;
        }
        f64::from(self.prefix[hi as usize + 1] - self.prefix[lo as usize])
    }

    /// Mass of `[a, b)` (closed for point masses), cell units.
    fn mass(&self, a: f64, b: f64) -> f64 {
        let count = if self.atoms {
            self.atoms_in(a, b)
        } else {
            self.count_below(b) - self.count_below(a)
        };
        count * self.mass_per_cell
    }
}

/// `mu([start, start + length))` in absolute coordinates.
pub fn interval_mass(s: &CellSet, start: f64, length: f64) -> Result<f64, FractalError> {
    let profile = MassProfile::new(s)?;
    let a = start / profile.width;
    Ok(profile.mass(a, a + length / profile.width))
}

/// Scans dyadic scales `2^t` in `[alpha0, alpha1]` with windows at every
/// cell-aligned position for the upper bound, and intervals centered at each
/// cell's endpoints and midpoint for the lower bound.
pub fn regularity_report(s: &CellSet, delta: f64, alpha0: f64, alpha1: f64) -> Result<RegularityReport, FractalError> {
    if s.is_empty() {
        return Err(FractalError::EmptySet);
    }
    let profile = MassProfile::new(s)?;
    let width = profile.width;
    let empty = || FractalError::EmptyScaleRange { alpha0, alpha1, width };
    if alpha0.partial_cmp(&alpha1).is_none_or(|o| o.is_gt()) || alpha0 < width * (1.0 - 1e-12) {
        return Err(empty());
    }
    let t_min = (alpha0.log2() - 1e-9).ceil() as i32;
    let t_max = (alpha1.log2() + 1e-9).floor() as i32;
    let scales: Vec<f64> = (t_min..=t_max)
        .map(|t| 2f64.powi(t))
        .filter(|&len| len >= width * (1.0 - 1e-12))
        .collect();
    if scales.is_empty() {
        return Err(empty());
    }

    let cells = s.dense_indices(MAX_DENSE_RESOLUTION)?;
    let mut centers: Vec<f64> = if profile.atoms {
        cells.iter().map(|&i| i as f64).collect()
    } else {
        cells
            .iter()
            .flat_map(|&i| [i as f64, i as f64 + 0.5, i as f64 + 1.0])
            .collect()
    };
    centers.dedup();

    let n = profile.cells() as i64;
    let mut upper: Option<Witness> = None;
    let mut lower: Option<Witness> = None;
    for &len in &scales {
        let span = len / width;
        let size = len.powf(delta);
        for p in -(span.ceil() as i64)..=n {
            let a = p as f64;
            let mass = profile.mass(a, a + span);
            let ratio = mass / size;
            if upper.is_none_or(|w| ratio > w.ratio) {
                upper = Some(Witness { start: a * width, length: len, mass, ratio });
            }
        }
        for &c in &centers {
            let a = c - span / 2.0;
            let mass = profile.mass(a, a + span);
            let ratio = size / mass;
            if lower.is_none_or(|w| ratio > w.ratio) {
                lower = Some(Witness { start: a * width, length: len, mass, ratio });
            }
        }
    }
    let c_upper = upper.map_or(0.0, |w| w.ratio);
    let c_lower = lower.map_or(0.0, |w| w.ratio);
    Ok(RegularityReport {
        delta,
        alpha0,
        alpha1,
        scales,
        c_upper,
        c_lower,
        c_r: c_upper.max(c_lower).max(1.0),
        bracket_factor: 2f64.powf(1.0 + delta),
        upper_witness: upper,
        lower_witness: lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `|X|`.
    pub measure: f64,
    /// `24 C^2 alpha1^delta alpha0^(1-delta)` with `C = c_r`.
    pub bound: f64,
    /// `measure / bound`.
    pub ratio: f64,
    pub passed: bool,
}

/// Checks `|X| <= 24 C^2 alpha1^delta alpha0^(1-delta)` using the report's `c_r`.
pub fn lebesgue_bound_check(s: &CellSet, report: &RegularityReport) -> BoundCheck {
    let measure = lebesgue_measure(s).to_f64().unwrap_or(f64::INFINITY);
    let bound = 24.0
        * report.c_r.powi(2)
        * report.alpha1.powf(report.delta)
        * report.alpha0.powf(1.0 - report.delta);
    let ratio = if bound > 0.0 { measure / bound } else if measure == 0.0 { 0.0 } else { f64::INFINITY };
    BoundCheck { measure, bound, ratio, passed: measure <= bound }
}
