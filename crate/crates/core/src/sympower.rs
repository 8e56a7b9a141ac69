//! Coefficients of `L(s, sym^m f)` and of `Σ λ_f(n^m) n^{-s}`, assembled
//! multiplicatively from per-prime local data.
//!
//! At an unramified prime with angle `θ` the `sym^m` local factor has the
//! eigenvalues `e^{i(m-2j)θ}`, `j = 0..=m`, so `λ_{sym^m f}(p^e)` is the complete
//! homogeneous symmetric polynomial `h_e` of those eigenvalues. For the
//! power kind, `λ_f(p^{em}) = U_{em}(cos θ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::FormDescriptor;
use crate::hecke::{sine_ratio, ThetaTable};
use crate::primes::primes_up_to;

pub const DEFAULT_BLOCK_SIZE: usize = 1 << 20;

/// Imaginary parts below this (relative to the trivial bound `C(e+m, m)`)
/// are roundoff; above it the expansion is broken.
const IMAGINARY_FAILURE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamKind {
    /// `λ_{sym^m f}(n)`
    Sym,
    /// `λ_f(n^m)`
    Power,
}

impl std::fmt::Display for StreamKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StreamKind::Sym => "sym",
            StreamKind::Power => "power",
        })
    }
}

impl std::str::FromStr for StreamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(StreamKind::Sym),
            "power" => Ok(StreamKind::Power),
            _ => Err(Error::InvalidArgument(format!("unknown stream kind `{s}`"))),
        }
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `c_0..=c_K` of `Π_{j=0}^{m} (1 - e^{i(m-2j)θ} t)^{-1}`.
pub fn sym_local_coefficients(theta: f64, m: u32, k_max: usize) -> Result<Vec<f64>> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ = {theta} outside [0, π]")));
    }
    if m == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("need m >= 1 and K >= 1".into()));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); k_max + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for j in 0..=m as i64 {
        let beta = Complex64::from_polar(1.0, (m as i64 - 2 * j) as f64 * theta);
        for k in 1..=k_max {
            let prev = c[k - 1];
            c[k] += beta * prev;
        }
    }
    c.iter()
        .enumerate()
        .map(|(k, z)| {
            let scale = binomial(k as u64 + m as u64, m as u64).max(1.0);
            if z.im.abs() > IMAGINARY_FAILURE * scale {
                Err(Error::ImaginaryResidue {
                    residue: z.im,
                    k,
                    m,
                })
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// A contiguous run `values[i] = value(start + i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub start: usize,
    pub values: Vec<f64>,
}

/// Multiplicative coefficients for `1 <= n <= x`, replayable block by block.
#[derive(Clone, Debug)]
pub struct SymCoefficientStream {
    form: FormDescriptor,
    m: u32,
    kind: StreamKind,
    bound: usize,
    block_size: usize,
    /// every prime `<= bound`, increasing
    primes: Vec<usize>,
    /// `value(p)` aligned with `primes`
    first: Vec<f64>,
    /// `value(p^e)` for `e = 0..=K_p`, for the prefix of primes with `p^2 <= bound`
    powers: Vec<Vec<f64>>,
}

fn max_exponent(p: usize, x: usize) -> usize {
    let mut e = 0;
    let mut pe = 1usize;
    while pe.saturating_mul(p) <= x {
        pe *= p;
        e += 1;
    }
    e
}

/// Builds the local tables for a stream up to `x`.
///
/// `kind = Sym` requires level 1. Ramified primes (power kind, level > 1)
/// use `λ_f(p^{em}) = λ_f(p)^{em}`.
pub fn assemble_multiplicative(
    table: &ThetaTable,
    m: u32,
    x: usize,
    kind: StreamKind,
) -> Result<SymCoefficientStream> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if x == 0 {
        return Err(Error::InvalidArgument("stream bound must be positive".into()));
    }
    if x > table.bound() {
        return Err(Error::InvalidArgument(format!(
            "stream bound {x} exceeds the angle table bound {}",
            table.bound()
        )));
    }
    let level = table.form().level();
    if kind == StreamKind::Sym && level != 1 {
        return Err(Error::LevelNotSupported(level));
    }
    let primes = primes_up_to(x);
    let mut first = Vec::with_capacity(primes.len());
    let mut powers = Vec::new();
    for &p in &primes {
        let k_max = max_exponent(p, x);
        let local: Vec<f64> = if let Some(entry) = table.get(p) {
            match kind {
                StreamKind::Sym => sym_local_coefficients(entry.theta, m, k_max)?,
                StreamKind::Power => (0..=k_max as u32)
                    .map(|e| sine_ratio(entry.theta, e * m))
                    .collect(),
            }
        } else if let Some(&(_, lambda)) = table.ramified().iter().find(|r| r.0 == p) {
            (0..=k_max as i32).map(|e| lambda.powi(e * m as i32)).collect()
        } else {
            return Err(Error::InvalidArgument(format!("no local data for prime {p}")));
        };
        first.push(local[1]);
        if k_max >= 2 {
            powers.push(local);
        }
    }
    Ok(SymCoefficientStream {
        form: table.form().clone(),
        m,
        kind,
        bound: x,
        block_size: DEFAULT_BLOCK_SIZE,
        primes,
        first,
        powers,
    })
}

impl SymCoefficientStream {
    pub fn with_block_size(mut self, block_size: usize) -> Self {
        assert!(block_size > 0);
        self.block_size = block_size;
        self
    }

    pub fn form(&self) -> &FormDescriptor {
        &self.form
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn kind(&self) -> StreamKind {
        self.kind
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn blocks(&self) -> Blocks<'_> {
        Blocks {
            stream: self,
            next: 1,
        }
    }

    /// `(n, value(n))` for `n = 1..=x`, in order.
    pub fn values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.blocks()
            .flat_map(|b| (b.start..).zip(b.values))
    }

    /// Whole stream in memory; index 0 is unused (zero).
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bound + 1);
        out.push(0.0);
        for b in self.blocks() {
            out.extend(b.values);
        }
        out
    }

    fn produce(&self, lo: usize, hi: usize) -> Block {
        let len = hi - lo + 1;
        let mut rem: Vec<usize> = (lo..=hi).collect();
        let mut values = vec![1.0f64; len];
        for (idx, local) in self.powers.iter().enumerate() {
            let p = self.primes[idx];
            if p * p > hi {
                break;
            }
            let mut n = lo.div_ceil(p) * p;
            while n <= hi {
                let i = n - lo;
                let mut e = 0;
                while rem[i] % p == 0 {
                    rem[i] /= p;
                    e += 1;
                }
                values[i] *= local[e];
                n += p;
            }
        }
        for i in 0..len {
            let r = rem[i];
            if r > 1 {
                // what is left is a single prime above sqrt(hi)
                let j = self.primes.binary_search(&r).expect("cofactor is prime");
                values[i] *= self.first[j];
            }
        }
        Block { start: lo, values }
    }
}

pub struct Blocks<'a> {
    stream: &'a SymCoefficientStream,
    next: usize,
}

impl Iterator for Blocks<'_> {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let s = self.stream;
        if self.next > s.bound {
            return None;
        }
        let lo = self.next;
        let hi = (lo + s.block_size - 1).min(s.bound);
        self.next = hi + 1;
        Some(s.produce(lo, hi))
    }
}

/// `d_{m+1}(n)` for all `n <= limit`: the constant-one function convolved
/// with itself `m+1` times.
pub fn divisor_bound_table(limit: usize, m: u32) -> Vec<u64> {
    let mut d = vec![1u64; limit + 1];
    d[0] = 0;
    for _ in 0..m {
        let mut next = vec![0u64; limit + 1];
        for k in 1..=limit {
            let dk = d[k];
            let mut j = k;
            while j <= limit {
                next[j] += dk;
                j += k;
            }
        }
        d = next;
    }
    d
}

/// Number of ordered factorizations of `n` into `m + 1` factors.
pub fn divisor_bound(n: usize, m: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    Ok(divisor_bound_table(n, m)[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::expand;
    use crate::hecke::{lambda_prime_power_chebyshev, theta_table};
    use crate::primes::{factorize, gcd};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn local_coefficient_examples() {
        let c = sym_local_coefficients(FRAC_PI_2, 2, 1).unwrap();
        assert!((c[1] + 1.0).abs() < 1e-12);
        let c = sym_local_coefficients(0.0, 2, 2).unwrap();
        assert!((c[2] - 6.0).abs() < 1e-12);
        assert_eq!(c[0], 1.0);
        assert!(sym_local_coefficients(4.0, 2, 2).is_err());
    }

    #[test]
    fn m1_local_coefficients_are_chebyshev() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let t = rng.random_range(0.0..=PI);
            let k = rng.random_range(1..=20u32);
            let c = sym_local_coefficients(t, 1, k as usize).unwrap();
            let want = lambda_prime_power_chebyshev(t, k).unwrap();
            assert!((c[k as usize] - want).abs() < 1e-9, "θ={t} k={k}");
        }
    }

    /// Real-arithmetic oracle: pair conjugate eigenvalues, each pair is
    /// `1/(1 - 2cos(φ)t + t^2)`, the middle eigenvalue (even m) is 1.
    fn local_real_oracle(theta: f64, m: u32, k_max: usize) -> Vec<f64> {
        let mut c = vec![0.0; k_max + 1];
        c[0] = 1.0;
        for j in 0..=(m / 2) as i64 {
            let phi = (m as i64 - 2 * j) as f64 * theta;
            if m as i64 == 2 * j {
                for k in 1..=k_max {
                    c[k] += c[k - 1];
                }
            } else {
                let two_cos = 2.0 * phi.cos();
                for k in 1..=k_max {
                    c[k] += two_cos * c[k - 1] - if k >= 2 { c[k - 2] } else { 0.0 };
                }
            }
        }
        c
    }

    #[test]
    fn complex_expansion_matches_real_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let t = rng.random_range(0.0..=PI);
            let m = rng.random_range(1..=8);
            let c = sym_local_coefficients(t, m, 12).unwrap();
            let o = local_real_oracle(t, m, 12);
            for k in 0..=12 {
                assert!((c[k] - o[k]).abs() <= 1e-9 * o[k].abs().max(1.0), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisor_bound(6, 1).unwrap(), 4);
        assert_eq!(divisor_bound(1, 7).unwrap(), 1);
        // ordered triples (a, b, c) with abc = 4
        let brute = (1..=4)
            .flat_map(|a| (1..=4).flat_map(move |b| (1..=4).map(move |c| (a, b, c))))
            .filter(|&(a, b, c)| a * b * c == 4)
            .count();
        assert_eq!(divisor_bound(4, 2).unwrap(), brute as u64);
        assert_eq!(brute, 6);
        assert!(divisor_bound(0, 1).is_err());
    }

    #[test]
    fn divisor_sieve_matches_closed_form() {
        for m in 1..=5u32 {
            let t = divisor_bound_table(3000, m);
            for n in 1..=3000u64 {
                let want: f64 = factorize(n)
                    .iter()
                    .map(|&(_, e)| binomial(e as u64 + m as u64, m as u64))
                    .product();
                assert_eq!(t[n as usize], want as u64, "n={n} m={m}");
            }
        }
    }

    fn delta_table(x: usize) -> ThetaTable {
        theta_table(&expand(&FormDescriptor::delta(), x).unwrap())
    }

    #[test]
    fn m1_sym_stream_is_lambda() {
        let x = 10_000;
        let s = expand(&FormDescriptor::delta(), x).unwrap();
        let stream = assemble_multiplicative(&theta_table(&s), 1, x, StreamKind::Sym).unwrap();
        for (n, v) in stream.values() {
            let want = s.lambda_at(n).unwrap();
            assert!((v - want).abs() <= 1e-9 * want.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn kinds_agree_at_primes_and_are_multiplicative() {
        let x = 5000;
        let t = delta_table(x);
        for m in 1..=4 {
            let sym = assemble_multiplicative(&t, m, x, StreamKind::Sym).unwrap().to_vec();
            let pow = assemble_multiplicative(&t, m, x, StreamKind::Power).unwrap().to_vec();
            assert_eq!(sym[1], 1.0);
            assert_eq!(pow[1], 1.0);
            for p in primes_up_to(x) {
                assert!((sym[p] - pow[p]).abs() < 1e-9);
            }
            for v in [&sym, &pow] {
                assert!((v[12] - v[4] * v[3]).abs() < 1e-12);
                let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
                for _ in 0..500 {
                    let a = rng.random_range(2..=70);
                    let b = rng.random_range(2..=70);
                    if gcd(a as u64, b as u64) == 1 {
                        let prod = v[a] * v[b];
                        assert!((v[a * b] - prod).abs() <= 1e-9 * prod.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn block_boundaries_do_not_matter() {
        let t = delta_table(3000);
        let whole = assemble_multiplicative(&t, 3, 3000, StreamKind::Sym).unwrap();
        let chunked = whole.clone().with_block_size(37);
        assert_eq!(whole.to_vec(), chunked.to_vec());
        assert_eq!(chunked.blocks().count(), 3000usize.div_ceil(37));
    }

    #[test]
    fn sym_rejects_higher_level() {
        let s = expand(&FormDescriptor::lvl11(), 100).unwrap();
        let t = theta_table(&s);
        assert!(matches!(
            assemble_multiplicative(&t, 2, 100, StreamKind::Sym),
            Err(Error::LevelNotSupported(11))
        ));
        let pow = assemble_multiplicative(&t, 2, 100, StreamKind::Power).unwrap().to_vec();
        // λ(11^2) = λ(11)^2 = 1/11 since a(11) = 1
        assert!((pow[11] - 1.0 / 11.0).abs() < 1e-12);
        assert!(assemble_multiplicative(&t, 2, 101, StreamKind::Power).is_err());
    }

    #[test]
    fn divisor_bound_dominates_sym_coefficients() {
        let x = 10_000;
        let t = delta_table(x);
        for m in 1..=4 {
            let d = divisor_bound_table(x, m);
            let v = assemble_multiplicative(&t, m, x, StreamKind::Sym).unwrap().to_vec();
            for n in 1..=x {
                assert!(v[n].abs() <= d[n] as f64 + 1e-6, "m={m} n={n}");
            }
        }
    }
}
