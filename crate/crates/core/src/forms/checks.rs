//! Exact-integer invariant scans over an expanded coefficient table.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::CoefficientSeries;
use crate::primes::{gcd, primes_up_to};

fn p_pow(p: usize, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

/// Primes `p <= sqrt(X)` where the degree-2 Hecke relation fails:
/// `a(p^2) = a(p)^2 - p^{k-1}` for `p ∤ N`, `a(p^2) = a(p)^2` for `p | N`.
pub fn hecke_p2_violations(series: &CoefficientSeries) -> Vec<usize> {
    let x = series.precision();
    let k = series.form().weight();
    let root = (x as f64).sqrt() as usize + 1;
    primes_up_to(root)
        .into_iter()
        .filter(|&p| p * p <= x)
        .filter(|&p| {
            let ap = series.a(p).unwrap();
            let mut want = ap * ap;
            if !series.form().divides_level(p as u64) {
                want -= p_pow(p, k - 1);
            }
            series.a(p * p).unwrap() != &want
        })
        .collect()
}

/// Pairs `(m, n)` from `pairs` with `gcd(m, n) = 1`, `mn <= X` and
/// `a(mn) != a(m) a(n)`.
pub fn multiplicativity_violations(
    series: &CoefficientSeries,
    pairs: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    pairs
        .par_iter()
        .copied()
        .filter(|&(m, n)| {
            let a = |i| series.a(i).unwrap();
            a(m * n) != &(a(m) * a(n))
        })
        .collect()
}

/// Deterministic sample of `count` coprime pairs `(m, n)`, `m, n >= 2`,
/// with `m·n <= x`.
pub fn coprime_pairs(x: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    assert!(x >= 6, "need room for at least one coprime pair");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.random_range(2..=x / 2);
        let hi = x / m;
        if hi < 2 {
            continue;
        }
        let n = rng.random_range(2..=hi);
        if gcd(m as u64, n as u64) == 1 {
            out.push((m, n));
        }
    }
    out
}

/// Unramified primes `p <= bound` with `a(p)^2 > 4 p^{k-1}`.
pub fn deligne_violations(series: &CoefficientSeries, bound: usize) -> Vec<usize> {
    let k = series.form().weight();
    let bound = bound.min(series.precision());
    primes_up_to(bound)
        .into_par_iter()
        .filter(|&p| !series.form().divides_level(p as u64))
        .filter(|&p| {
            let ap = series.a(p).unwrap();
            ap * ap > p_pow(p, k - 1) * 4u32
        })
        .collect()
}

/// Primes `p <= X`, `p ≡ residue (mod modulus)`, where `a(p) != 0`.
pub fn cm_vanishing_violations(series: &CoefficientSeries, modulus: usize, residue: usize) -> Vec<usize> {
    primes_up_to(series.precision())
        .into_iter()
        .filter(|&p| p % modulus == residue && !series.a(p).unwrap().is_zero())
        .collect()
}
