//! Exact rank of small integer matrices.
//!
//! The rank over the rationals comes from fraction-free (Bareiss)
//! elimination on big integers; it is then cross-checked against plain
//! Gaussian elimination modulo two primes above `2^20`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

pub const CROSS_CHECK_PRIMES: [u64; 2] = [1_000_000_007, 998_244_353];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank: usize,
    pub rank_mod: [usize; 2],
}

impl RankCertificate {
    pub fn consistent(&self) -> bool {
        self.rank_mod.iter().all(|&r| r == self.rank)
    }
}

pub fn certify_rank(rows: &[Vec<i64>]) -> RankCertificate {
    RankCertificate {
        rank: bareiss_rank(rows),
        rank_mod: CROSS_CHECK_PRIMES.map(|p| rank_mod_prime(rows, p)),
    }
}

/// Rank over `Q` by fraction-free elimination; every intermediate entry is a
/// minor of the input, so each division is exact.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let height = m.len();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..width {
        if rank == height {
            break;
        }
        let Some(pivot) = (rank..height).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let p = &pivot_row[col];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[col]);
            for j in col + 1..width {
                let updated = &row[j] * p - &lead * &pivot_row[j];
                let (q, r) = updated.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                row[j] = q;
            }
        }
        prev = top[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Rank over `Z/pZ`.
pub fn rank_mod_prime(rows: &[Vec<i64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect())
        .collect();
    let height = m.len();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        if rank == height {
            break;
        }
        let Some(pivot) = (rank..height).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = mod_pow(m[rank][col], p - 2, p);
        for v in m[rank][col..].iter_mut() {
            *v = *v * inv % p;
        }
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            let factor = row[col];
            if factor == 0 {
                continue;
            }
            for j in col..width {
                row[j] = (row[j] + p - factor * pivot_row[j] % p) % p;
            }
        }
        rank += 1;
    }
    rank
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}
