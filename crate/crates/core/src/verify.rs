//! Named invariant checks, grouped by module, behind `walsh-fup verify`.
//!
//! Every check is deterministic: random inputs come from fixed seeds.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::{certify, exact_dimension, indicator_membership_check, BasisFamily};
use crate::dyadic::{dyadic_add, dyadic_mul, walsh_eval, walsh_eval_recursive, DyadicRational};
use crate::fractal::{
    lebesgue_bound_check, natural_scale_range, regularity_report, CellSet, FractalParams, Side,
};
use crate::fup::{
    beta_fit, dense_sigma_max, power_iteration, sweep, write_csv, Family, SweepSpec, TransformKind,
    DEFAULT_TOLERANCE,
};
use crate::transform::{walsh_entry, CoefficientVector, SpectrumVector, TransformPlan};

/// `(m1, m2, n)` grid of the certificate checks.
pub const CERTIFICATE_GRID: &[(u32, u32, u32)] = &[
    (1, 1, 1), (1, 1, 2), (1, 1, 3), (1, 1, 4),
    (1, 2, 1), (1, 2, 2), (1, 2, 3),
    (2, 2, 1), (2, 2, 2),
    (1, 3, 1), (1, 3, 2),
    (2, 3, 1),
];

pub const MODULES: &[&str] = &["dyadic", "transform", "fractal", "certificate", "fup"];

type CheckFn = fn() -> Result<(), String>;

#[derive(Clone, Copy)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub run: CheckFn,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub module: &'static str,
    pub name: &'static str,
    pub elapsed: Duration,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub outcomes: Vec<Outcome>,
}

impl Summary {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.failure.is_none()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

// negated so that NaN fails
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5EED ^ tag)
}

fn random_dyadic(rng: &mut ChaCha8Rng) -> DyadicRational {
    let mantissa: u64 = rng.random_range(0..1 << 40);
    DyadicRational::from_u64(mantissa).mul_pow2(rng.random_range(-60..20))
}

fn params(m1: u32, m2: u32, n: u32) -> Result<FractalParams, String> {
    FractalParams::new(m1, m2, n).map_err(|e| e.to_string())
}

pub fn checks() -> Vec<Check> {
    macro_rules! check {
        ($module:literal, $name:ident) => {
            Check { module: $module, name: stringify!($name), run: $name }
        };
    }
    vec![
        check!("dyadic", add_group_laws),
        check!("dyadic", scaling_lemma),
        check!("dyadic", product_rule),
        check!("dyadic", periodicity),
        check!("dyadic", recursion_agreement),
        check!("transform", symmetry),
        check!("transform", orthogonality),
        check!("transform", parseval),
        check!("transform", entry_consistency),
        check!("transform", involution),
        check!("transform", indicator_transform),
        check!("fractal", xy_index_identity),
        check!("fractal", self_similarity),
        check!("fractal", measure_normalization),
        check!("fractal", monotone_reporting),
        check!("fractal", uniform_regularity),
        check!("certificate", rank_certificate),
        check!("certificate", double_support),
        check!("certificate", parseval_restricted),
        check!("certificate", dimension_agreement),
        check!("certificate", span_characterization),
        check!("certificate", indicator_membership),
        check!("fup", witness_consistency),
        check!("fup", hs_domination),
        check!("fup", subcritical_monotone),
        check!("fup", dense_oracle),
        check!("fup", dft_contrast),
        check!("fup", sweep_determinism),
    ]
}

/// Checks of `suite`, which is `all` or a module name.
pub fn suite(name: &str) -> Option<Vec<Check>> {
    if name == "all" {
        return Some(checks());
    }
    MODULES
        .contains(&name)
        .then(|| checks().into_iter().filter(|c| c.module == name).collect())
}

/// Runs the checks in order, writing one `[PASS]`/`[FAIL]` line each.
pub fn run_checks<W: Write>(checks: &[Check], out: &mut W) -> std::io::Result<Summary> {
    let mut summary = Summary::default();
    for check in checks {
        let start = Instant::now();
        let failure = (check.run)().err();
        let elapsed = start.elapsed();
        match &failure {
            None => writeln!(out, "[PASS] {}::{} ({:.2?})", check.module, check.name, elapsed)?,
            Some(why) => writeln!(out, "[FAIL] {}::{}: {}", check.module, check.name, why)?,
        }
        summary.outcomes.push(Outcome { module: check.module, name: check.name, elapsed, failure });
    }
    writeln!(out, "{} passed, {} failed", summary.passed(), summary.failed())?;
    Ok(summary)
}

fn add_group_laws() -> Result<(), String> {
    let mut rng = rng(1);
    for _ in 0..2000 {
        let (x, y, z) = (random_dyadic(&mut rng), random_dyadic(&mut rng), random_dyadic(&mut rng));
        ensure!(dyadic_add(&x, &y) == dyadic_add(&y, &x), "{x} ⊕ {y} not commutative");
        ensure!(dyadic_add(&x, &x).is_zero(), "{x} ⊕ {x} nonzero");
        ensure!(
            dyadic_add(&dyadic_add(&x, &y), &z) == dyadic_add(&x, &dyadic_add(&y, &z)),
            "⊕ not associative on {x}, {y}, {z}"
        );
    }
    Ok(())
}

fn scaling_lemma() -> Result<(), String> {
    let mut rng = rng(2);
    for _ in 0..10_000 {
        let (x, y) = (random_dyadic(&mut rng), random_dyadic(&mut rng));
        let l = rng.random_range(-20..=20);
        ensure!(
            dyadic_mul(&x.mul_pow2(l), &y) == dyadic_mul(&x, &y.mul_pow2(l)),
            "scaling fails for {x}, {y}, l = {l}"
        );
    }
    Ok(())
}

fn product_rule() -> Result<(), String> {
    for k in 0..1u64 << 6 {
        for k2 in 0..1u64 << 6 {
            for j in 0..1u64 << 8 {
                let x = DyadicRational::grid(j, 8);
                let lhs = walsh_eval(k, &x).map_err(|e| e.to_string())? * walsh_eval(k2, &x).map_err(|e| e.to_string())?;
                ensure!(lhs == walsh_eval(k ^ k2, &x).map_err(|e| e.to_string())?, "W_{k} W_{k2} at {x}");
            }
        }
    }
    let mut rng = rng(3);
    for _ in 0..50_000 {
        let (k, k2) = (rng.random_range(0..1u64 << 12), rng.random_range(0..1u64 << 12));
        let x = DyadicRational::grid(rng.random_range(0..1 << 14), 14);
        let lhs = walsh_eval(k, &x).map_err(|e| e.to_string())? * walsh_eval(k2, &x).map_err(|e| e.to_string())?;
        ensure!(lhs == walsh_eval(k ^ k2, &x).map_err(|e| e.to_string())?, "W_{k} W_{k2} at {x}");
    }
    Ok(())
}

fn periodicity() -> Result<(), String> {
    let mut rng = rng(4);
    for _ in 0..50_000 {
        let k = rng.random_range(0..1u64 << 10);
        let l = rng.random_range(0..=6i64);
        let x = DyadicRational::grid(rng.random_range(0..1 << 14), 14);
        let shifted = x.xor(&DyadicRational::one().mul_pow2(-l));
        if !shifted.is_below_one() {
            // 1-periodicity leaves [0, 1)
            continue;
        }
        let n = k << l;
        ensure!(
            walsh_eval(n, &x).map_err(|e| e.to_string())? == walsh_eval(n, &shifted).map_err(|e| e.to_string())?,
            "W_{n} not 2^-{l} periodic at {x}"
        );
    }
    Ok(())
}

fn recursion_agreement() -> Result<(), String> {
    let mut rng = rng(5);
    for _ in 0..50_000 {
        let n = rng.random_range(0..1u64 << 12);
        let x = DyadicRational::grid(rng.random_range(0..1 << 14), 14);
        ensure!(
            walsh_eval(n, &x).map_err(|e| e.to_string())? == walsh_eval_recursive(n, &x).map_err(|e| e.to_string())?,
            "W_{n} at {x}"
        );
    }
    Ok(())
}

fn entry(k: u64, j: u64, bits: u32) -> Result<i64, String> {
    walsh_entry(k, j, bits).map(|s| s.value()).map_err(|e| e.to_string())
}

fn symmetry() -> Result<(), String> {
    for bits in 0..=6 {
        for k in 0..1u64 << bits {
            for j in 0..1u64 << bits {
                ensure!(entry(k, j, bits)? == entry(j, k, bits)?, "K = {bits}: ({k}, {j})");
            }
        }
    }
    let mut rng = rng(6);
    for _ in 0..20_000 {
        let bits = rng.random_range(7..=10);
        let (k, j) = (rng.random_range(0..1u64 << bits), rng.random_range(0..1u64 << bits));
        ensure!(entry(k, j, bits)? == entry(j, k, bits)?, "K = {bits}: ({k}, {j})");
    }
    Ok(())
}

fn orthogonality() -> Result<(), String> {
    for bits in 0..=8u32 {
        let n = 1u64 << bits;
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|k| (0..n).map(|j| entry(k, j, bits)).collect())
            .collect::<Result<_, _>>()?;
        for a in 0..n as usize {
            for b in 0..n as usize {
                let dot: i64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y).sum();
                let expected = if a == b { n as i64 } else { 0 };
                ensure!(dot == expected, "K = {bits}: rows {a}, {b} give {dot}");
            }
        }
    }
    Ok(())
}

fn random_coefficients(rng: &mut ChaCha8Rng, bits: u32) -> Result<CoefficientVector<i64>, String> {
    let values = (0..1usize << bits).map(|_| rng.random_range(-1000..=1000)).collect();
    CoefficientVector::new(bits, values).map_err(|e| e.to_string())
}

fn parseval() -> Result<(), String> {
    let mut rng = rng(7);
    for bits in 0..=14 {
        let plan = TransformPlan::<i64>::new(bits).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let c = random_coefficients(&mut rng, bits)?;
            let d = plan.forward(&c).map_err(|e| e.to_string())?;
            ensure!(c.norm_sq() == d.norm_sq(), "K = {bits}: {} vs {}", c.norm_sq(), d.norm_sq());
        }
    }
    Ok(())
}

fn entry_consistency() -> Result<(), String> {
    for bits in 0..=8 {
        let n = 1u64 << bits;
        for k in 0..n {
            for j in 0..n {
                let x = DyadicRational::grid(j, bits);
                let by_eval = walsh_eval(k, &x).map_err(|e| e.to_string())?.value();
                ensure!(entry(k, j, bits)? == by_eval, "K = {bits}: ({k}, {j})");
            }
        }
    }
    Ok(())
}

fn involution() -> Result<(), String> {
    let mut rng = rng(8);
    for bits in 2..=14 {
        let plan = TransformPlan::<i64>::new(bits).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let c = random_coefficients(&mut rng, bits)?;
            let back = plan.inverse(&plan.forward(&c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure!(back == c, "K = {bits}: round trip differs");
        }
    }
    Ok(())
}

/// The transform of the indicator of `[a 2^-k, (a+1) 2^-k)`, sampled two
/// levels finer, is `2^-k W_a(...)` on `[0, 2^k)` and zero above.
fn indicator_transform() -> Result<(), String> {
    for k in 0..=8u32 {
        let depth = k + 2;
        let plan = TransformPlan::<i64>::new(depth).map_err(|e| e.to_string())?;
        for a in 0..1u64 << k {
            let mut values = vec![0i64; 1 << depth];
            values[(a as usize) << 2..((a as usize) + 1) << 2].fill(1);
            let c = CoefficientVector::new(depth, values).map_err(|e| e.to_string())?;
            let d = plan.forward(&c).map_err(|e| e.to_string())?;
            for m in 0..1u64 << depth {
                let coefficient = d.value_at(m as usize);
                let expected = if m < 1 << k { (entry(m, a, k)?, -(k as i32)) } else { (0, 0) };
                ensure!(
                    coefficient == expected || (coefficient.0 == 0 && expected.0 == 0),
                    "|I| = 2^-{k}, a = {a}, m = {m}: {coefficient:?}"
                );
            }
        }
    }
    Ok(())
}

const FRACTAL_GRID: &[(u32, u32)] = &[(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)];

fn xy_index_identity() -> Result<(), String> {
    for &(m1, m2) in FRACTAL_GRID {
        for n in 1..=4 {
            let p = params(m1, m2, n)?;
            let (x, y) = (p.x_set().map_err(|e| e.to_string())?, p.y_set().map_err(|e| e.to_string())?);
            ensure!(x.indices() == y.indices(), "{p}: X and Y indices differ");
        }
    }
    Ok(())
}

fn self_similarity() -> Result<(), String> {
    for &(m1, m2) in FRACTAL_GRID {
        let first = params(m1, m2, 1)?.y_set().map_err(|e| e.to_string())?;
        for n in 2..=4 {
            let p = params(m1, m2, n)?;
            let prev = params(m1, m2, n - 1)?.y_set().map_err(|e| e.to_string())?;
            let mut expected: Vec<_> = prev
                .indices()
                .iter()
                .flat_map(|q| first.indices().iter().map(move |s| q * p.base() + s))
                .collect();
            expected.sort();
            ensure!(p.y_set().map_err(|e| e.to_string())?.indices() == expected.as_slice(), "{p}");
        }
    }
    Ok(())
}

fn measure_normalization() -> Result<(), String> {
    for &(m1, m2) in FRACTAL_GRID {
        for n in 1..=4 {
            let p = params(m1, m2, n)?;
            let x = p.x_set().map_err(|e| e.to_string())?;
            ensure!(x.total_mass() == num_rational::BigRational::from_integer(1.into()), "{p}: mass {}", x.total_mass());
        }
    }
    Ok(())
}

fn monotone_reporting() -> Result<(), String> {
    let p = params(1, 2, 2)?;
    let x = p.x_set().map_err(|e| e.to_string())?;
    for lo in 0..=6 {
        for hi in lo..=6 {
            let inner = regularity_report(&x, p.delta(), 2f64.powi(lo - 6), 2f64.powi(hi - 6)).map_err(|e| e.to_string())?;
            for (wider_lo, wider_hi) in [(lo.max(1) - 1, hi), (lo, (hi + 1).min(6))] {
                let outer = regularity_report(&x, p.delta(), 2f64.powi(wider_lo - 6), 2f64.powi(wider_hi - 6))
                    .map_err(|e| e.to_string())?;
                ensure!(outer.c_r >= inner.c_r, "[{lo}, {hi}] widened lowers c_r");
            }
        }
    }
    Ok(())
}

/// `c_r(X_n)` and `c_r(Y_n)` stay within a factor 2 over `n = 1..5`, and the
/// measure bound holds at every level.
pub fn regularity_series(m1: u32, m2: u32, side: Side) -> Result<Vec<f64>, String> {
    (1..=5)
        .map(|n| {
            let p = params(m1, m2, n)?;
            let set: CellSet = match side {
                Side::Fine => p.x_set(),
                _ => p.y_set(),
            }
            .map_err(|e| e.to_string())?;
            let (a0, a1) = natural_scale_range(&set);
            let report = regularity_report(&set, p.delta(), a0, a1).map_err(|e| e.to_string())?;
            let bound = lebesgue_bound_check(&set, &report);
            ensure!(bound.passed, "{p} {side}: |X| = {} > {}", bound.measure, bound.bound);
            Ok(report.c_r)
        })
        .collect()
}

fn uniform_regularity() -> Result<(), String> {
    for (m1, m2) in [(1, 1), (1, 2)] {
        for side in [Side::Fine, Side::Unit] {
            let series = regularity_series(m1, m2, side)?;
            let (lo, hi) = series.iter().fold((f64::MAX, f64::MIN), |(a, b), &c| (a.min(c), b.max(c)));
            ensure!(hi / lo <= 2.0, "({m1},{m2}) {side}: {series:?}");
        }
    }
    Ok(())
}

fn rank_certificate() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n)?;
        let family = BasisFamily::build(p).map_err(|e| e.to_string())?;
        let expected = 1usize << (n * (m2 - m1));
        ensure!(family.len() == expected, "{p}: {} vectors", family.len());
        let rank = family.rank().map_err(|e| e.to_string())?;
        ensure!(rank == expected, "{p}: rank {rank}");
    }
    Ok(())
}

fn double_support() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n)?;
        let family = BasisFamily::build(p).map_err(|e| e.to_string())?;
        let x = p.x_set().and_then(|s| s.dense_indices(1 << 24)).map_err(|e| e.to_string())?;
        let y = p.y_set().and_then(|s| s.dense_indices(1 << 24)).map_err(|e| e.to_string())?;
        for (i, (f, g)) in family.x_side.iter().zip(&family.y_side).enumerate() {
            ensure!(f.vanishes_off(&x), "{p}: function {i} leaves X_n");
            ensure!(g.vanishes_off(&y), "{p}: spectrum {i} leaves Y_n");
        }
    }
    Ok(())
}

fn parseval_restricted() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n)?;
        let family = BasisFamily::build(p).map_err(|e| e.to_string())?;
        for (i, w) in family.witnesses.iter().enumerate() {
            ensure!(w.norms_agree(), "{p}: witness {i}: {} {} {}", w.norm_sq_on_x, w.norm_sq_full, w.spectrum_norm_sq_on_y);
        }
    }
    Ok(())
}

fn dimension_agreement() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let p = params(m1, m2, n)?;
        let report = certify(p, true).map_err(|e| e.to_string())?;
        let dim = report.exact_dimension.unwrap_or(0);
        ensure!(dim >= report.constructed_count as u64, "{p}: dimension {dim} < {}", report.constructed_count);
    }
    let p = params(2, 1, 1)?;
    ensure!(exact_dimension(p).map_err(|e| e.to_string())? == 0, "{p}: nontrivial kernel");
    Ok(())
}

fn span_characterization() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID.iter().filter(|(a, b, n)| n * (a + b) <= 12) {
        let p = params(m1, m2, n)?;
        let k = p.bit_depth();
        let mut allowed = vec![0u64];
        for _ in 0..n {
            allowed = allowed
                .iter()
                .flat_map(|&f| (0..p.digits_per_level()).map(move |d| f * p.base() + (d << m1)))
                .collect();
        }
        allowed.sort_unstable();
        let plan = TransformPlan::<i64>::new(k).map_err(|e| e.to_string())?;
        for g in BasisFamily::build(p).map_err(|e| e.to_string())?.y_side {
            // expansion of g in the frequency-side Walsh basis, by symmetry of H_rev
            let as_function = CoefficientVector::new(k, g.values().to_vec()).map_err(|e| e.to_string())?;
            let coefficients: SpectrumVector<i64> = plan.forward(&as_function).map_err(|e| e.to_string())?;
            for q in coefficients.support() {
                ensure!(allowed.binary_search(&(q as u64)).is_ok(), "{p}: frequency {q}");
            }
        }
    }
    Ok(())
}

fn indicator_membership() -> Result<(), String> {
    for n in 1..=4 {
        let p = params(1, 1, n)?;
        ensure!(indicator_membership_check(p).map_err(|e| e.to_string())?, "{p}");
    }
    for n in 1..=3 {
        let p = params(1, 2, n)?;
        ensure!(indicator_membership_check(p).map_err(|e| e.to_string())?, "{p}");
    }
    let p = params(2, 1, 1)?;
    ensure!(!indicator_membership_check(p).map_err(|e| e.to_string())?, "{p}");
    Ok(())
}

fn standard_sigma(kind: TransformKind, m1: u32, m2: u32, n: u32) -> Result<(f64, f64), String> {
    let (x, y) = Family::Standard { m1, m2 }.sets(n).map_err(|e| e.to_string())?;
    let estimate = power_iteration(kind, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    Ok((estimate.sigma_max, crate::fup::hs_bound(&x, &y)))
}

fn witness_consistency() -> Result<(), String> {
    for &(m1, m2, n) in CERTIFICATE_GRID {
        let (sigma, _) = standard_sigma(TransformKind::Walsh, m1, m2, n)?;
        ensure!((sigma - 1.0).abs() <= 1e-12, "({m1},{m2},{n}): sigma {sigma}");
    }
    Ok(())
}

fn hs_domination() -> Result<(), String> {
    for kind in [TransformKind::Walsh, TransformKind::Dft] {
        for &(m1, m2) in FRACTAL_GRID {
            for n in 1..=3 {
                if kind == TransformKind::Dft && (m1 + m2) * n > 10 {
                    continue;
                }
                let (sigma, hs) = standard_sigma(kind, m1, m2, n)?;
                ensure!(sigma <= hs + 1e-12 && sigma <= 1.0 + 1e-12, "{kind} ({m1},{m2},{n}): {sigma} vs {hs}");
            }
        }
    }
    Ok(())
}

fn subcritical_monotone() -> Result<(), String> {
    for (m1, m2, top) in [(2, 1, 5), (3, 1, 4), (3, 2, 3)] {
        let mut previous = f64::INFINITY;
        for n in 1..=top {
            let (sigma, hs) = standard_sigma(TransformKind::Walsh, m1, m2, n)?;
            ensure!(sigma <= previous + 1e-12, "({m1},{m2}) increases at n = {n}");
            ensure!(sigma <= hs + 1e-12, "({m1},{m2},{n}): {sigma} > {hs}");
            previous = sigma;
        }
    }
    let bound: Vec<(f64, f64)> = (1..=5).map(|n| (8f64.powi(n), 2f64.powf(-(n as f64) / 2.0))).collect();
    let fit = beta_fit(&bound).map_err(|e| e.to_string())?;
    ensure!((fit.beta - 1.0 / 6.0).abs() < 1e-9, "bound exponent {}", fit.beta);
    Ok(())
}

fn dense_oracle() -> Result<(), String> {
    let mut cases = Vec::new();
    for kind in [TransformKind::Walsh, TransformKind::Dft] {
        for &(m1, m2) in FRACTAL_GRID {
            for n in 1u32.. {
                if (m1 + m2) * n > 9 {
                    break;
                }
                cases.push((kind, Family::Standard { m1, m2 }, n));
            }
        }
    }
    for n in 1..=5 {
        cases.push((TransformKind::Dft, Family::Digits { base: 3, alphabet: vec![0, 2] }, n));
    }
    for (kind, family, n) in cases {
        let (x, y) = family.sets(n).map_err(|e| e.to_string())?;
        let dense = dense_sigma_max(kind, &x, &y).map_err(|e| e.to_string())?;
        let iterated = power_iteration(kind, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.sigma_max;
        ensure!((dense - iterated).abs() < 1e-9, "{kind} {family:?} n = {n}: {iterated} vs {dense}");
    }
    Ok(())
}

fn dft_contrast() -> Result<(), String> {
    let ternary = Family::Digits { base: 3, alphabet: vec![0, 2] };
    let mut previous = f64::INFINITY;
    let mut last = 1.0;
    for n in 1..=5 {
        let (x, y) = ternary.sets(n).map_err(|e| e.to_string())?;
        let sigma = power_iteration(TransformKind::Dft, &x, &y, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.sigma_max;
        ensure!(sigma < previous, "dft sigma does not decrease at n = {n}");
        previous = sigma;
        last = sigma;
        let (walsh, _) = standard_sigma(TransformKind::Walsh, 1, 1, n)?;
        ensure!((walsh - 1.0).abs() <= 1e-10, "walsh sigma {walsh} at n = {n}");
    }
    ensure!(last < 0.999, "dft sigma {last} at n = 5");
    Ok(())
}

fn sweep_determinism() -> Result<(), String> {
    let spec = SweepSpec {
        transforms: vec![TransformKind::Walsh, TransformKind::Dft],
        families: vec![Family::Standard { m1: 1, m2: 1 }, Family::Standard { m1: 2, m2: 1 }],
        n_range: (1, 3),
        tolerance: DEFAULT_TOLERANCE,
        output: None,
    };
    let csv_with = |threads: usize| -> Result<Vec<u8>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let records = pool.install(|| sweep(&spec)).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    ensure!(csv_with(1)? == csv_with(4)?, "CSV depends on the thread count");
    Ok(())
}
