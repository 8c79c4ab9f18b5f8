//! Acceptance criteria 1-10, one PASS/FAIL line each. Runs without the test
//! harness; a failing criterion makes the process exit nonzero.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walsh_fup::certificate::{certify, exact_dimension, indicator_membership_check, BasisFamily};
use walsh_fup::dyadic::{dyadic_mul, walsh_eval, walsh_eval_recursive, DyadicRational};
use walsh_fup::fractal::{lebesgue_bound_check, natural_scale_range, regularity_report, FractalParams};
use walsh_fup::fup::{beta_fit, power_iteration, restricted_norm, Family, TransformKind, DEFAULT_TOLERANCE};
use walsh_fup::transform::{walsh_forward, walsh_inverse, CoefficientVector, TransformPlan};

const INVOLUTION_BUDGET: Duration = Duration::from_secs(10);
const CERTIFICATE_BUDGET: Duration = Duration::from_secs(60);
const MEMBERSHIP_BUDGET: Duration = Duration::from_secs(5);
const WALSH_NORM_TOL: f64 = 1e-10;
const HS_TOL: f64 = 1e-12;
const BETA_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;
const DFT_CEILING: f64 = 0.999;
const REGULARITY_SPREAD: f64 = 2.0;
const GOLDEN_TOL: f64 = 1e-12;
const DENSE_LIMIT: u64 = 512;

/// `c_r` recorded on the first run, per `(m1, m2)`; identical for `X_n` and
/// `Y_n` and for every `n = 1..5`.
fn golden_c_r(m1: u32, m2: u32) -> f64 {
    match (m1, m2) {
        (1, 1) => 2.0,
        (1, 2) => 2f64.powf(4.0 / 3.0),
        _ => unreachable!(),
    }
}

const CERTIFICATE_GRID: &[(u32, u32, u32)] = &[
    (1, 1, 1), (1, 1, 2), (1, 1, 3), (1, 1, 4),
    (1, 2, 1), (1, 2, 2), (1, 2, 3),
    (2, 2, 1), (2, 2, 2),
    (1, 3, 1), (1, 3, 2),
    (2, 3, 1),
];

type Outcome = Result<String, String>;

fn params(m1: u32, m2: u32, n: u32) -> FractalParams {
    FractalParams::new(m1, m2, n).unwrap()
}

/// Cells whose `n` base-`2^(m1+m2)` digits are all multiples of `2^m1`,
/// enumerated directly.
fn oracle_cells(m1: u32, m2: u32, n: u32) -> Vec<usize> {
    let base = 1usize << (m1 + m2);
    let digits: Vec<usize> = (0..1usize << m2).map(|d| d << m1).collect();
    let mut cells = vec![0usize];
    for _ in 0..n {
        cells = cells.iter().flat_map(|&c| digits.iter().map(move |&d| c * base + d)).collect();
    }
    cells.sort_unstable();
    cells
}

fn involution() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 2..=14u32 {
        for _ in 0..20 {
            let values: Vec<i64> = (0..1usize << k).map(|_| rng.random_range(-1_000_000..=1_000_000)).collect();
            let c = CoefficientVector::new(k, values).map_err(|e| e.to_string())?;
            let back = walsh_inverse(&walsh_forward(&c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            if back != c {
                return Err(format!("K = {k}: round trip differs"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > INVOLUTION_BUDGET {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("K = 2..14, 20 vectors each, exact, {elapsed:.2?}"))
}

fn algebraic_lemmas() -> Outcome {
    let w = |k: u64, x: &DyadicRational| walsh_eval(k, x).unwrap();
    let mut products = 0u64;
    for k in 0..1u64 << 6 {
        for k2 in 0..1u64 << 6 {
            for j in 0..1u64 << 8 {
                let x = DyadicRational::grid(j, 8);
                if w(k, &x) * w(k2, &x) != w(k ^ k2, &x) {
                    return Err(format!("W_{k} W_{k2} != W_{} at {x}", k ^ k2));
                }
                products += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let x = DyadicRational::from_u64(rng.random_range(0..1 << 32)).mul_pow2(rng.random_range(-40..10));
        let y = DyadicRational::from_u64(rng.random_range(0..1 << 32)).mul_pow2(rng.random_range(-40..10));
        let l = rng.random_range(-20..=20);
        if dyadic_mul(&x.mul_pow2(l), &y) != dyadic_mul(&x, &y.mul_pow2(l)) {
            return Err(format!("scaling fails for {x}, {y}, l = {l}"));
        }
    }
    let mut periods = 0u64;
    for k in 0..1u64 << 6 {
        for l in 1..=6i64 {
            let shift = DyadicRational::one().mul_pow2(-l);
            for j in 0..1u64 << 8 {
                let x = DyadicRational::grid(j, 8);
                let moved = x.xor(&shift);
                if w(k << l, &x) != w(k << l, &moved) {
                    return Err(format!("W_{} not 2^-{l} periodic at {x}", k << l));
                }
                periods += 1;
            }
        }
    }
    Ok(format!("{products} products, 10000 scalings, {periods} shifts, zero failures"))
}

/// Indicators of `[a 2^-K, (a+1) 2^-K)` sampled two levels finer; the
/// expected sign is `W_m(a 2^-K)` from the recursion.
fn indicator_transform() -> Outcome {
    let mut intervals = 0;
    for k in 0..=8u32 {
        let depth = k + 2;
        let plan = TransformPlan::<i64>::new(depth).unwrap();
        for a in 0..1usize << k {
            let mut values = vec![0i64; 1 << depth];
            values[a << 2..(a + 1) << 2].fill(1);
            let d = plan.forward(&CoefficientVector::new(depth, values).unwrap()).unwrap();
            let left = DyadicRational::grid(a as u64, k);
            for m in 0..1usize << depth {
                let (value, scale) = d.value_at(m);
                if m < 1 << k {
                    let sign = walsh_eval_recursive(m as u64, &left).unwrap().value();
                    if (value, scale) != (sign, -(k as i32)) {
                        return Err(format!("|I| = 2^-{k}, a = {a}, m = {m}: {value} 2^{scale}"));
                    }
                } else if value != 0 {
                    return Err(format!("|I| = 2^-{k}, a = {a}: nonzero at m = {m}"));
                }
            }
            intervals += 1;
        }
    }
    Ok(format!("{intervals} intervals, K <= 8, exact"))
}

fn dimension_certificate() -> Outcome {
    let start = Instant::now();
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n);
        let claim = 1u64 << (n * (m2 - m1));
        let family = BasisFamily::build(p).map_err(|e| e.to_string())?;
        let rank = family.rank().map_err(|e| e.to_string())? as u64;
        if family.len() as u64 != claim || rank != claim {
            return Err(format!("{p}: {} vectors of rank {rank}, expected {claim}", family.len()));
        }
        let cells = oracle_cells(m1, m2, n);
        let inside = |i: usize| cells.binary_search(&i).is_ok();
        for (f, g) in family.x_side.iter().zip(&family.y_side) {
            if f.values().iter().enumerate().any(|(i, v)| *v != 0 && !inside(i)) {
                return Err(format!("{p}: function leaves X_n"));
            }
            if g.values().iter().enumerate().any(|(i, v)| *v != 0 && !inside(i)) {
                return Err(format!("{p}: spectrum leaves Y_n"));
            }
        }
        let report = certify(p, true).map_err(|e| e.to_string())?;
        let dim = report.exact_dimension.unwrap_or(0);
        if dim < claim || !report.passed() {
            return Err(format!("{p}: dimension {dim} < {claim}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > CERTIFICATE_BUDGET {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{} parameter sets, {elapsed:.2?}", CERTIFICATE_GRID.len()))
}

fn norm_equality() -> Outcome {
    let mut witnesses = 0;
    let mut worst = 0f64;
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n);
        let cells = oracle_cells(m1, m2, n);
        let family = BasisFamily::build(p).map_err(|e| e.to_string())?;
        for f in &family.x_side {
            let on_x: i128 = cells.iter().map(|&i| (f.values()[i] as i128).pow(2)).sum();
            let full: i128 = f.values().iter().map(|&v| (v as i128).pow(2)).sum();
            if on_x != full || full == 0 {
                return Err(format!("{p}: {on_x} on X_n against {full}"));
            }
            witnesses += 1;
        }
        let (x, y) = (p.x_set().unwrap(), p.y_set().unwrap());
        let sigma = restricted_norm(TransformKind::Walsh, &x, &y, DEFAULT_TOLERANCE)
            .map_err(|e| e.to_string())?
            .sigma_max
            .unwrap_or(f64::NAN);
        if (sigma - 1.0).abs().is_nan() || (sigma - 1.0).abs() > WALSH_NORM_TOL {
            return Err(format!("{p}: sigma_max = {sigma}"));
        }
        worst = worst.max((sigma - 1.0).abs());
    }
    Ok(format!("{witnesses} witnesses exact, max |sigma_max - 1| = {worst:.1e}"))
}

fn remark_check() -> Outcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    cases.extend((1..=4).map(|n| (params(1, 1, n), true)));
    cases.extend((1..=3).map(|n| (params(1, 2, n), true)));
    cases.push((params(2, 1, 1), false));
    for (p, expected) in cases {
        let got = indicator_membership_check(p).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!("{p}: {got}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > MEMBERSHIP_BUDGET {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("8 cases, {elapsed:.2?}"))
}

fn subcritical_regime() -> Outcome {
    let mut bound_points = Vec::new();
    for n in 1..=5 {
        let p = params(2, 1, n);
        let (x, y) = (p.x_set().unwrap(), p.y_set().unwrap());
        let record = restricted_norm(TransformKind::Walsh, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        let sigma = record.sigma_max.unwrap_or(f64::NAN);
        let closed_form = 2f64.powf(-(n as f64) / 2.0);
        if sigma.is_nan() || sigma > closed_form + HS_TOL {
            return Err(format!("n = {n}: sigma_max = {sigma} > {closed_form}"));
        }
        let hs = record.hs_bound.unwrap_or(f64::NAN);
        if (hs - closed_form).abs() > HS_TOL {
            return Err(format!("n = {n}: hs_bound = {hs}"));
        }
        bound_points.push((record.resolution as f64, hs));
    }
    let dim = exact_dimension(params(2, 1, 1)).map_err(|e| e.to_string())?;
    if dim != 0 {
        return Err(format!("exact_dimension(2, 1, 1) = {dim}"));
    }
    let fit = beta_fit(&bound_points).map_err(|e| e.to_string())?;
    let expected = 0.5 - 1.0 / 3.0;
    if (fit.beta - expected).abs() > BETA_TOL {
        return Err(format!("beta = {}", fit.beta));
    }
    Ok(format!("sigma_max <= 2^(-n/2), dim = 0, beta = {:.12}", fit.beta))
}

fn regularity() -> Outcome {
    let mut lines = Vec::new();
    for (m1, m2) in [(1, 1), (1, 2)] {
        for side in ["X", "Y"] {
            let mut series = Vec::new();
            for n in 1..=5 {
                let p = params(m1, m2, n);
                let set = if side == "X" { p.x_set() } else { p.y_set() }.unwrap();
                let (a0, a1) = natural_scale_range(&set);
                let report = regularity_report(&set, p.delta(), a0, a1).map_err(|e| e.to_string())?;
                let check = lebesgue_bound_check(&set, &report);
                if !check.passed {
                    return Err(format!("{p} {side}: |set| = {} > {}", check.measure, check.bound));
                }
                let golden = golden_c_r(m1, m2);
                if (report.c_r - golden).abs() > GOLDEN_TOL {
                    return Err(format!("{p} {side}: c_r = {} against golden {golden}", report.c_r));
                }
                series.push(report.c_r);
            }
            let (lo, hi) = series.iter().fold((f64::MAX, f64::MIN), |(a, b), &c| (a.min(c), b.max(c)));
            if hi / lo > REGULARITY_SPREAD {
                return Err(format!("({m1},{m2}) {side}: spread {}", hi / lo));
            }
            lines.push(format!("({m1},{m2}) {side}: c_r = {:.6}", series[0]));
        }
    }
    Ok(lines.join(", "))
}

fn bit_reverse(j: usize, bits: u32) -> usize {
    (0..bits).fold(0, |acc, b| acc | (((j >> b) & 1) << (bits - 1 - b)))
}

/// Sub-matrix of the unitary transform written out entry by entry.
fn oracle_sigma(kind: TransformKind, x: &[usize], y: &[usize], n: usize) -> f64 {
    let scale = (n as f64).sqrt().recip();
    let bits = n.trailing_zeros();
    let b = DMatrix::from_fn(y.len(), x.len(), |r, c| match kind {
        TransformKind::Walsh => {
            let parity = (y[r] & bit_reverse(x[c], bits)).count_ones() % 2;
            Complex64::new(if parity == 1 { -scale } else { scale }, 0.0)
        }
        TransformKind::Dft => {
            let angle = -2.0 * std::f64::consts::PI * (y[r] * x[c]) as f64 / n as f64;
            Complex64::from_polar(scale, angle)
        }
    });
    b.singular_values().max()
}

fn oracle_equivalence() -> Outcome {
    let mut instances: Vec<(TransformKind, Family, u32)> = Vec::new();
    for kind in [TransformKind::Walsh, TransformKind::Dft] {
        for (m1, m2) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (2, 3), (3, 1), (3, 2), (1, 4)] {
            for n in 1u32.. {
                if 1u64 << ((m1 + m2) * n) > DENSE_LIMIT {
                    break;
                }
                instances.push((kind, Family::Standard { m1, m2 }, n));
            }
        }
    }
    for n in 1..=5 {
        instances.push((TransformKind::Dft, Family::Digits { base: 3, alphabet: vec![0, 2] }, n));
    }
    let mut worst = 0f64;
    for (kind, family, n) in &instances {
        let (x, y) = family.sets(*n).map_err(|e| e.to_string())?;
        let dense_x = x.dense_indices(DENSE_LIMIT).map_err(|e| e.to_string())?;
        let dense_y = y.dense_indices(DENSE_LIMIT).map_err(|e| e.to_string())?;
        let resolution = x.resolution().to_string().parse::<usize>().unwrap();
        let expected = oracle_sigma(*kind, &dense_x, &dense_y, resolution);
        let got = power_iteration(*kind, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.sigma_max;
        let diff = (expected - got).abs();
        if diff > ORACLE_TOL {
            return Err(format!("{kind} {family:?} n = {n}: {got} against {expected}"));
        }
        worst = worst.max(diff);
    }
    Ok(format!("{} instances, max deviation {worst:.1e}", instances.len()))
}

fn dft_contrast() -> Outcome {
    let ternary = Family::Digits { base: 3, alphabet: vec![0, 2] };
    let mut dft = Vec::new();
    for n in 1..=5 {
        let (x, y) = ternary.sets(n).map_err(|e| e.to_string())?;
        dft.push(power_iteration(TransformKind::Dft, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.sigma_max);
        let p = params(1, 1, n);
        let walsh = power_iteration(TransformKind::Walsh, &p.x_set().unwrap(), &p.y_set().unwrap(), DEFAULT_TOLERANCE)
            .map_err(|e| e.to_string())?
            .sigma_max;
        if (walsh - 1.0).abs() > WALSH_NORM_TOL {
            return Err(format!("walsh sigma_max = {walsh} at n = {n}"));
        }
    }
    if !dft.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("dft not strictly decreasing: {dft:?}"));
    }
    if dft[4].is_nan() || dft[4] >= DFT_CEILING {
        return Err(format!("dft sigma_max(5) = {}", dft[4]));
    }
    let shown: Vec<String> = dft.iter().map(|s| format!("{s:.6}")).collect();
    Ok(format!("dft sigma_max = [{}], walsh = 1", shown.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact involution", involution),
        ("algebraic lemma suite", algebraic_lemmas),
        ("indicator transform", indicator_transform),
        ("dimension certificate", dimension_certificate),
        ("norm equality", norm_equality),
        ("indicator membership", remark_check),
        ("subcritical regime", subcritical_regime),
        ("regularity", regularity),
        ("oracle equivalence", oracle_equivalence),
        ("dft contrast", dft_contrast),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
