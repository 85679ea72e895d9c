//! Search for primes `p` with a large square divisor `d² | p − a`,
//! `d² ≥ p^θ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1/2 + 1/700`.
pub const DEFAULT_THETA: f64 = 0.5 + 1.0 / 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub p: u64,
    pub d: u64,
    pub a: i64,
    pub theta: f64,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin; the first twelve prime bases suffice below 2⁶⁴.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// `d² ≥ p^θ`, compared in logarithms.
fn square_is_large(p: u64, d: u64, theta: f64) -> bool {
    2.0 * (d as f64).ln() >= theta * (p as f64).ln()
}

pub fn is_witness(p: u64, d: u64, a: i64, theta: f64) -> bool {
    if a == 0 || d == 0 || p <= a.unsigned_abs() || !is_prime(p) {
        return false;
    }
    let Some(d2) = d.checked_mul(d) else {
        return false;
    };
    let diff = p as i128 - a as i128;
    diff % d2 as i128 == 0 && square_is_large(p, d, theta)
}

pub fn is_squarefree(mut n: u64) -> bool {
    let mut q = 2u64;
    while q * q <= n {
        if n % q == 0 {
            n /= q;
            if n % q == 0 {
                return false;
            }
        }
        q += 1;
    }
    true
}

/// Largest `p` worth testing for this `d`: `⌊d^{2/θ}⌋`.
fn search_bound(d: u64, theta: f64) -> Result<u64> {
    let bound = (d as f64).powf(2.0 / theta).floor();
    if !(bound < u64::MAX as f64) {
        return Err(Error::RangeOverflow { d });
    }
    Ok(bound as u64)
}

fn witnesses_for(a: i64, d: u64, theta: f64) -> Result<Vec<WitnessRecord>> {
    let limit = search_bound(d, theta)?;
    let Some(d2) = d.checked_mul(d) else {
        return Err(Error::RangeOverflow { d });
    };
    let floor = a.unsigned_abs();
    let mut n = (a as i128).rem_euclid(d2 as i128) as u64;
    if n <= floor {
        n += (floor - n) / d2 * d2;
        while n <= floor {
            n += d2;
        }
    }
    let mut out = Vec::new();
    while n <= limit {
        if is_witness(n, d, a, theta) {
            out.push(WitnessRecord { p: n, d, a, theta });
        }
        match n.checked_add(d2) {
            Some(m) => n = m,
            None => break,
        }
    }
    Ok(out)
}

/// All `(p, d)` with `d_min ≤ d ≤ d_max` and `p ≤ d^{2/θ}`, sorted by `p`
/// then `d`.
pub fn find_witnesses(
    a: i64,
    d_min: u64,
    d_max: u64,
    theta: f64,
    squarefree_only: bool,
) -> Result<Vec<WitnessRecord>> {
    if a == 0 {
        return Err(Error::InvalidArgument("a must be nonzero".into()));
    }
    if d_min < 2 || d_min > d_max {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= d_min <= d_max, got {d_min}:{d_max}"
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "theta must be positive, got {theta}"
        )));
    }
    search_bound(d_max, theta)?;
    let per_d = (d_min..=d_max)
        .into_par_iter()
        .filter(|&d| !squarefree_only || is_squarefree(d))
        .map(|d| witnesses_for(a, d, theta))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<WitnessRecord> = per_d.into_iter().flatten().collect();
    all.sort_by_key(|r| (r.p, r.d));
    all.dedup_by_key(|r| (r.p, r.d));
    Ok(all)
}
