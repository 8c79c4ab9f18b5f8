//! Restricted operator norms `|1_Y F 1_X|` for the Walsh transform and the
//! unitary DFT, parameter sweeps and decay-exponent fits.
//!
//! `x` is a set of fine cells of `[0, 1)` at resolution `N`, `y` a set of
//! unit frequency cells in `[0, N)`. The operator is the sub-matrix of the
//! orthogonal Walsh matrix `N^(-1/2) H_rev` (or of the unitary DFT) with rows
//! indexed by `y` and columns by `x`. Its top singular value comes from power
//! iteration on `B^H B` through the fast transforms; [`dense_sigma_max`]
//! computes the same number from a full SVD.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fractal::{build_cantor_cells, lebesgue_measure, CellSet, FractalError, FractalParams, Side};
use crate::transform::{bit_reverse, dft_apply, walsh_unitary_apply, Direction, TransformError};

pub const POWER_ITERATION_SEED: u64 = 0x5EED;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Floor under the `10 N` iteration cap; small grids can have nearly
/// degenerate top singular values.
pub const MIN_ITERATION_CAP: u64 = 10_000;
/// Largest bit depth for Walsh norms.
pub const MAX_WALSH_DEPTH: u32 = 20;
/// Largest resolution for DFT norms.
pub const MAX_DFT_RESOLUTION: u64 = 1 << 14;
/// Largest resolution for the dense SVD.
pub const MAX_DENSE_RESOLUTION: u64 = 1 << 12;

pub const CSV_HEADER: [&str; 14] = [
    "transform", "m1", "m2", "base", "alphabet", "n", "N", "delta", "sigma_max", "hs_bound", "dim_lower",
    "iterations", "residual", "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Walsh,
    Dft,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Walsh => "walsh",
            TransformKind::Dft => "dft",
        })
    }
}

impl std::str::FromStr for TransformKind {
    type Err = FupError;

    fn from_str(s: &str) -> Result<Self, FupError> {
        match s {
            "walsh" => Ok(TransformKind::Walsh),
            "dft" => Ok(TransformKind::Dft),
            other => Err(FupError::InvalidSpec(format!("unknown transform {other:?}"))),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FupError {
    #[error(transparent)]
    Fractal(#[from] FractalError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("{kind} norm needs {what}, got {got}")]
    SizeCap { kind: TransformKind, what: &'static str, got: u64 },
    #[error("x must be fine cells and y unit cells of the same base and level")]
    IncompatibleSets,
    #[error("power iteration did not converge after {iterations} iterations (sigma {sigma}, residual {residual:e})")]
    NotConverged { iterations: u64, sigma: f64, residual: f64 },
    #[error("need at least 3 records with positive sigma, got {0}")]
    TooFewPoints(usize),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
}

/// One norm measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FupRecord {
    pub transform: TransformKind,
    pub m1: Option<u32>,
    pub m2: Option<u32>,
    pub base: u64,
    pub alphabet: Vec<u64>,
    pub n: u32,
    #[serde(rename = "N")]
    pub resolution: u64,
    pub delta: f64,
    pub sigma_max: Option<f64>,
    pub hs_bound: Option<f64>,
    pub dim_lower: Option<u64>,
    pub iterations: Option<u64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

impl FupRecord {
    pub fn csv_row(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map_or_else(String::new, |v| v.to_string())
        }
        vec![
            self.transform.to_string(),
            opt(self.m1),
            opt(self.m2),
            self.base.to_string(),
            self.alphabet.iter().map(u64::to_string).collect::<Vec<_>>().join("|"),
            self.n.to_string(),
            self.resolution.to_string(),
            format!("{:.12}", self.delta),
            self.sigma_max.map_or_else(String::new, |s| format!("{s:.12}")),
            self.hs_bound.map_or_else(String::new, |s| format!("{s:.12}")),
            opt(self.dim_lower),
            opt(self.iterations),
            self.residual.map_or_else(String::new, |r| format!("{r:e}")),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// `sqrt(|X| |Y|)`, which dominates every singular value of the sub-matrix.
pub fn hs_bound(x: &CellSet, y: &CellSet) -> f64 {
    let product = lebesgue_measure(x) * lebesgue_measure(y);
    product.to_f64().unwrap_or(f64::INFINITY).sqrt()
}

struct Restricted {
    kind: TransformKind,
    size: usize,
    x: Vec<usize>,
    y: Vec<usize>,
}

impl Restricted {
    fn new(kind: TransformKind, x: &CellSet, y: &CellSet) -> Result<Self, FupError> {
        if x.side() != Side::Fine || y.side() != Side::Unit || x.base() != y.base() || x.level() != y.level() {
            return Err(FupError::IncompatibleSets);
        }
        let resolution = x.resolution();
        match kind {
            TransformKind::Walsh => {
                let depth = x.bit_depth().ok_or(FupError::SizeCap {
                    kind,
                    what: "a power-of-two base",
                    got: x.base(),
                })?;
                if depth > MAX_WALSH_DEPTH {
                    return Err(FupError::SizeCap { kind, what: "bit depth at most 20", got: depth.into() });
                }
            }
            TransformKind::Dft => {
                if resolution > MAX_DFT_RESOLUTION.into() {
                    let got = resolution.to_u64().unwrap_or(u64::MAX);
                    return Err(FupError::SizeCap { kind, what: "resolution at most 2^14", got });
                }
            }
        }
        let cap = resolution.to_u64().expect("resolution checked above");
        Ok(Restricted { kind, size: cap as usize, x: x.dense_indices(cap)?, y: y.dense_indices(cap)? })
    }

    fn transform(&self, full: &[Complex64], adjoint: bool) -> Vec<Complex64> {
        match self.kind {
            TransformKind::Walsh => walsh_unitary_apply(full).expect("power-of-two length"),
            TransformKind::Dft => {
                dft_apply(full, if adjoint { Direction::Inverse } else { Direction::Forward })
            }
        }
    }

    /// `v -> 1_y F 1_x v`
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); self.size];
        for (&j, &vj) in self.x.iter().zip(v) {
            full[j] = vj;
        }
        let out = self.transform(&full, false);
        self.y.iter().map(|&m| out[m]).collect()
    }

    /// `w -> 1_x F^H 1_y w`
    fn apply_adjoint(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); self.size];
        for (&m, &wm) in self.y.iter().zip(w) {
            full[m] = wm;
        }
        let out = self.transform(&full, true);
        self.x.iter().map(|&j| out[j]).collect()
    }
}

/// Top singular value with its power-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub sigma_max: f64,
    pub iterations: u64,
    /// `|B^H B v - lambda v| / |v|` at the last iterate.
    pub residual: f64,
}

/// Columns carried by the block iteration.
pub const BLOCK_SIZE: usize = 8;

/// Block power iteration on `B^H B` with a Rayleigh-Ritz step, seeded
/// deterministically, stopping when the top Ritz value changes by less than
/// `tolerance` relative. The cap is `10 N` iterations, but never below
/// [`MIN_ITERATION_CAP`].
///
/// The block keeps clusters of nearly equal top singular values from
/// stalling the iteration.
pub fn power_iteration(kind: TransformKind, x: &CellSet, y: &CellSet, tolerance: f64) -> Result<NormEstimate, FupError> {
    power_iteration_capped(kind, x, y, tolerance, None)
}

/// [`power_iteration`] with an explicit iteration cap.
pub fn power_iteration_capped(
    kind: TransformKind,
    x: &CellSet,
    y: &CellSet,
    tolerance: f64,
    cap: Option<u64>,
) -> Result<NormEstimate, FupError> {
    let op = Restricted::new(kind, x, y)?;
    if op.x.is_empty() || op.y.is_empty() {
        return Ok(NormEstimate { sigma_max: 0.0, iterations: 0, residual: 0.0 });
    }
    let rows = op.x.len();
    let block = BLOCK_SIZE.min(rows);
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let start = DMatrix::from_fn(rows, block, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut basis = start.qr().q();
    let cap = cap.unwrap_or((10 * op.size as u64).max(MIN_ITERATION_CAP));
    let mut previous = f64::NAN;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for iteration in 1..=cap {
        let mut image = DMatrix::zeros(rows, block);
        for c in 0..block {
            let column: Vec<Complex64> = basis.column(c).iter().copied().collect();
            let w = op.apply_adjoint(&op.apply(&column));
            image.set_column(c, &nalgebra::DVector::from_vec(w));
        }
        let projected = basis.adjoint() * &image;
        let hermitian = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
        let eigen = nalgebra::SymmetricEigen::new(hermitian);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
        let rotation = DMatrix::from_fn(block, block, |r, c| eigen.eigenvectors[(r, order[c])]);
        lambda = eigen.eigenvalues[order[0]].max(0.0);
        let top = &basis * rotation.column(0);
        let top_image = &image * rotation.column(0);
        residual = (&top_image - &top * Complex64::new(lambda, 0.0)).norm();
        if lambda == 0.0 {
            return Ok(NormEstimate { sigma_max: 0.0, iterations: iteration, residual: 0.0 });
        }
        if (lambda - previous).abs() < tolerance * lambda {
            return Ok(NormEstimate { sigma_max: lambda.sqrt(), iterations: iteration, residual });
        }
        previous = lambda;
        basis = (image * rotation).qr().q();
    }
    Err(FupError::NotConverged { iterations: cap, sigma: lambda.sqrt(), residual })
}

/// `sigma_max(1_y F 1_x)` as a record; the caller fills `m1`, `m2` and
/// `dim_lower`.
pub fn restricted_norm(kind: TransformKind, x: &CellSet, y: &CellSet, tolerance: f64) -> Result<FupRecord, FupError> {
    let estimate = power_iteration(kind, x, y, tolerance)?;
    let alphabet = x.alphabet().map(<[u64]>::to_vec).unwrap_or_default();
    Ok(FupRecord {
        transform: kind,
        m1: None,
        m2: None,
        base: x.base(),
        delta: alphabet_delta(x.base(), alphabet.len()),
        alphabet,
        n: x.level(),
        resolution: x.resolution().to_u64().unwrap_or(u64::MAX),
        sigma_max: Some(estimate.sigma_max),
        hs_bound: Some(hs_bound(x, y)),
        dim_lower: None,
        iterations: Some(estimate.iterations),
        residual: Some(estimate.residual),
        error: None,
    })
}

fn alphabet_delta(base: u64, digits: usize) -> f64 {
    if digits == 0 {
        0.0
    } else {
        (digits as f64).ln() / (base as f64).ln()
    }
}

/// The sub-matrix with rows `y` and columns `x`, built entry by entry.
pub fn dense_restricted_matrix(kind: TransformKind, x: &CellSet, y: &CellSet) -> Result<DMatrix<Complex64>, FupError> {
    let op = Restricted::new(kind, x, y)?;
    if op.size as u64 > MAX_DENSE_RESOLUTION {
        return Err(FupError::SizeCap { kind, what: "resolution at most 2^12 for a dense matrix", got: op.size as u64 });
    }
    let n = op.size;
    let scale = (n as f64).sqrt().recip();
    let bits = n.trailing_zeros();
    Ok(DMatrix::from_fn(op.y.len(), op.x.len(), |r, c| {
        let (m, j) = (op.y[r], op.x[c]);
        match kind {
            TransformKind::Walsh => {
                let odd = (m as u64 & bit_reverse(j as u64, bits)).count_ones() % 2 == 1;
                Complex64::new(if odd { -scale } else { scale }, 0.0)
            }
            TransformKind::Dft => {
                let phase = -2.0 * std::f64::consts::PI * ((m * j) % n) as f64 / n as f64;
                Complex64::from_polar(scale, phase)
            }
        }
    }))
}

/// Largest singular value from a full SVD.
pub fn dense_sigma_max(kind: TransformKind, x: &CellSet, y: &CellSet) -> Result<f64, FupError> {
    let b = dense_restricted_matrix(kind, x, y)?;
    if b.is_empty() {
        return Ok(0.0);
    }
    Ok(b.singular_values().max())
}

/// Parameter family of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `X_n, Y_n` with `L = 2^(m1+m2)` and `2^m2` digits.
    Standard { m1: u32, m2: u32 },
    /// Fine and unit cells of the Cantor set over `alphabet` in `base`.
    Digits { base: u64, alphabet: Vec<u64> },
}

impl Family {
    pub fn sets(&self, n: u32) -> Result<(CellSet, CellSet), FupError> {
        match self {
            Family::Standard { m1, m2 } => {
                let p = FractalParams::new(*m1, *m2, n)?;
                Ok((p.x_set()?, p.y_set()?))
            }
            Family::Digits { base, alphabet } => Ok((
                build_cantor_cells(*base, alphabet, n, Side::Fine)?,
                build_cantor_cells(*base, alphabet, n, Side::Unit)?,
            )),
        }
    }

    fn base(&self) -> Result<u64, FupError> {
        match self {
            Family::Standard { m1, m2 } => Ok(FractalParams::new(*m1, *m2, 1)?.base()),
            Family::Digits { base, .. } => Ok(*base),
        }
    }

    fn alphabet(&self) -> Vec<u64> {
        match self {
            Family::Standard { m1, m2 } => FractalParams { m1: *m1, m2: *m2, n: 1 }.alphabet(),
            Family::Digits { alphabet, .. } => {
                let mut a = alphabet.clone();
                a.sort_unstable();
                a.dedup();
                a
            }
        }
    }

    fn delta(&self) -> Result<f64, FupError> {
        match self {
            Family::Standard { m1, m2 } => Ok(FractalParams::new(*m1, *m2, 1)?.delta()),
            Family::Digits { base, .. } => Ok(alphabet_delta(*base, self.alphabet().len())),
        }
    }

    /// Checks one grid point against the size caps without building sets.
    fn check_point(&self, kind: TransformKind, n: u32) -> Result<(), FupError> {
        let base = self.base()?;
        match kind {
            TransformKind::Walsh => {
                if !base.is_power_of_two() {
                    return Err(FupError::SizeCap { kind, what: "a power-of-two base", got: base });
                }
                let depth = u64::from(base.trailing_zeros()) * u64::from(n);
                if depth > MAX_WALSH_DEPTH.into() {
                    return Err(FupError::SizeCap { kind, what: "bit depth at most 20", got: depth });
                }
            }
            TransformKind::Dft => {
                let resolution = base.checked_pow(n).unwrap_or(u64::MAX);
                if resolution > MAX_DFT_RESOLUTION {
                    return Err(FupError::SizeCap { kind, what: "resolution at most 2^14", got: resolution });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub transforms: Vec<TransformKind>,
    pub families: Vec<Family>,
    /// Inclusive range of levels.
    pub n_range: (u32, u32),
    pub tolerance: f64,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(transform: TransformKind, family: Family, n_range: (u32, u32)) -> Self {
        SweepSpec { transforms: vec![transform], families: vec![family], n_range, tolerance: DEFAULT_TOLERANCE, output: None }
    }

    /// Grid points in emission order: transform, then family, then level.
    pub fn points(&self) -> Vec<(TransformKind, Family, u32)> {
        let mut out = Vec::new();
        for &kind in &self.transforms {
            for family in &self.families {
                for n in self.n_range.0..=self.n_range.1 {
                    out.push((kind, family.clone(), n));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), FupError> {
        let (lo, hi) = self.n_range;
        if self.transforms.is_empty() || self.families.is_empty() || lo == 0 || lo > hi {
            return Err(FupError::InvalidSpec("empty grid".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(FupError::InvalidSpec(format!("tolerance {} outside (0, 1)", self.tolerance)));
        }
        for (kind, family, n) in self.points() {
            family.check_point(kind, n)?;
            family.sets(1)?;
        }
        Ok(())
    }
}

fn measure_point(kind: TransformKind, family: &Family, n: u32, tolerance: f64) -> FupRecord {
    let (m1, m2) = match family {
        Family::Standard { m1, m2 } => (Some(*m1), Some(*m2)),
        Family::Digits { .. } => (None, None),
    };
    let dim_lower = match (kind, m1, m2) {
        (TransformKind::Walsh, Some(a), Some(b)) if b >= a => 1u64.checked_shl(n * (b - a)),
        _ => None,
    };
    let base = family.base().unwrap_or(0);
    let mut record = FupRecord {
        transform: kind,
        m1,
        m2,
        base,
        alphabet: family.alphabet(),
        n,
        resolution: base.checked_pow(n).unwrap_or(u64::MAX),
        delta: family.delta().unwrap_or(f64::NAN),
        sigma_max: None,
        hs_bound: None,
        dim_lower,
        iterations: None,
        residual: None,
        error: None,
    };
    let sets = match family.sets(n) {
        Ok(sets) => sets,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.hs_bound = Some(hs_bound(&sets.0, &sets.1));
    match power_iteration(kind, &sets.0, &sets.1, tolerance) {
        Ok(estimate) => {
            record.sigma_max = Some(estimate.sigma_max);
            record.iterations = Some(estimate.iterations);
            record.residual = Some(estimate.residual);
        }
        Err(FupError::NotConverged { iterations, sigma, residual }) => {
            record.sigma_max = Some(sigma);
            record.iterations = Some(iterations);
            record.residual = Some(residual);
            record.error = Some(format!("not converged: residual {residual:e}"));
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// One record per grid point, in grid order. Points run in parallel on the
/// current rayon pool; failures land in the `error` column.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<FupRecord>, FupError> {
    spec.validate()?;
    let records: Vec<FupRecord> = spec
        .points()
        .par_iter()
        .map(|(kind, family, n)| measure_point(*kind, family, *n, spec.tolerance))
        .collect();
    if let Some(path) = &spec.output {
        let file = std::fs::File::create(path).map_err(|e| FupError::InvalidSpec(format!("{}: {e}", path.display())))?;
        write_csv(file, &records).map_err(|e| FupError::InvalidSpec(format!("{}: {e}", path.display())))?;
    }
    Ok(records)
}

pub fn write_csv<W: Write>(out: W, records: &[FupRecord]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for record in records {
        writer.write_record(record.csv_row())?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFit {
    /// Minus the slope of `ln sigma` against `ln N`.
    pub beta: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals in `ln sigma`.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares decay exponent from `(N, sigma)` pairs; pairs with
/// `sigma <= 0` are dropped.
pub fn beta_fit(points: &[(f64, f64)]) -> Result<BetaFit, FupError> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, s)| *s > 0.0 && *n > 0.0 && s.is_finite())
        .map(|(n, s)| (n.ln(), s.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(FupError::TooFewPoints(logs.len()));
    }
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(FupError::InvalidSpec("all records share one resolution".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / count).sqrt();
    Ok(BetaFit { beta: -slope, intercept, residual, points: logs.len() })
}

pub fn beta_fit_records(records: &[FupRecord]) -> Result<BetaFit, FupError> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.sigma_max.map(|s| (r.resolution as f64, s)))
        .collect();
    beta_fit(&points)
}
