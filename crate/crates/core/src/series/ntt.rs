//! Multi-prime number-theoretic transform with Chinese-remainder reconstruction.
//!
//! Products are computed modulo several word-size primes `p = c·2^s + 1 < 2^31`
//! and lifted back to exact integers with Garner's algorithm. The caller passes
//! a proven bound on the output magnitude; if the available primes cannot cover
//! twice that bound the multiplication fails instead of wrapping.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime, pow_mod};

/// Transforms at or above this size run their primes one after another to cap
/// peak memory; below it the primes are processed in parallel.
const SEQUENTIAL_LOG_SIZE: u32 = 23;

/// A prime `p < 2^31` with `2^max_log | p - 1`, and Montgomery constants for it.
#[derive(Clone, Debug)]
pub(crate) struct NttPrime {
    p: u32,
    /// `-p^{-1} mod 2^32`
    neg_inv: u32,
    /// `2^64 mod p`
    r2: u32,
    max_log: u32,
    /// Primitive `2^max_log`-th root of unity, normal (non-Montgomery) form.
    root: u32,
}

impl NttPrime {
    fn new(p: u32) -> Self {
        let max_log = (p - 1).trailing_zeros();
        let mut inv = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        let g = primitive_root(p as u64);
        let root = pow_mod(g, ((p - 1) >> max_log) as u64, p as u64) as u32;
        NttPrime {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
            max_log,
            root,
        }
    }

    pub(crate) fn modulus(&self) -> u32 {
        self.p
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.neg_inv);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn to_mont(&self, a: u32) -> u32 {
        self.mul(a, self.r2)
    }

    fn from_mont(&self, a: u32) -> u32 {
        self.reduce(a as u64)
    }

    fn pow_mont(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `tw[len + j] = w_{2len}^j` for every power of two `len < n`, Montgomery form.
    fn twiddles(&self, log_n: u32, inverse: bool) -> Vec<u32> {
        let n = 1usize << log_n;
        let mut tw = vec![0u32; n.max(2)];
        let mut root = self.to_mont(self.root);
        if inverse {
            root = self.pow_mont(root, (1u64 << self.max_log) - 1);
        }
        let mut len = 1usize;
        let mut level = 1u32;
        while len < n {
            // primitive 2^level-th root
            let w = self.pow_mont(root, 1u64 << (self.max_log - level));
            tw[len] = self.to_mont(1);
            for j in 1..len {
                tw[len + j] = self.mul(tw[len + j - 1], w);
            }
            len <<= 1;
            level += 1;
        }
        tw
    }

    /// Decimation-in-frequency; natural order in, bit-reversed order out.
    fn forward(&self, a: &mut [u32], tw: &[u32]) {
        let mut len = a.len() / 2;
        while len >= 1 {
            let w = &tw[len..2 * len];
            for chunk in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = chunk.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = hi[j];
                    lo[j] = self.add(u, v);
                    hi[j] = self.mul(self.sub(u, v), w[j]);
                }
            }
            len /= 2;
        }
    }

    /// Decimation-in-time inverse; bit-reversed order in, natural order out, unscaled.
    fn inverse(&self, a: &mut [u32], itw: &[u32]) {
        let n = a.len();
        let mut len = 1;
        while len < n {
            let w = &itw[len..2 * len];
            for chunk in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = chunk.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = self.mul(hi[j], w[j]);
                    lo[j] = self.add(u, v);
                    hi[j] = self.sub(u, v);
                }
            }
            len <<= 1;
        }
    }

    fn reduce_bigint(&self, c: &BigInt) -> u32 {
        if c.is_zero() {
            return 0;
        }
        let p = self.p as u64;
        let base = (1u64 << 32) % p;
        let mut r = 0u64;
        let mut scale = 1u64;
        for d in c.magnitude().iter_u32_digits() {
            r = (r + (d as u64 % p) * scale) % p;
            scale = scale * base % p;
        }
        let r = r as u32;
        if c.sign() == Sign::Minus && r != 0 {
            self.p - r
        } else {
            r
        }
    }

    /// Truncated product of `a` and `b` modulo this prime, first `out_len`
    /// coefficients, normal form.
    fn convolve(&self, a: &[BigInt], b: &[BigInt], out_len: usize, log_n: u32) -> Vec<u32> {
        let n = 1usize << log_n;
        let load = |src: &[BigInt]| {
            let mut v = vec![0u32; n];
            for (dst, c) in v.iter_mut().zip(src) {
                *dst = self.to_mont(self.reduce_bigint(c));
            }
            v
        };
        let tw = self.twiddles(log_n, false);
        let itw = self.twiddles(log_n, true);
        let squaring = std::ptr::eq(a, b);
        let mut fa = load(a);
        self.forward(&mut fa, &tw);
        if squaring {
            for x in fa.iter_mut() {
                *x = self.mul(*x, *x);
            }
        } else {
            let mut fb = load(b);
            self.forward(&mut fb, &tw);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = self.mul(*x, *y);
            }
        }
        self.inverse(&mut fa, &itw);
        let n_inv = self.pow_mont(self.to_mont(n as u32 % self.p), self.p as u64 - 2);
        fa.truncate(out_len);
        for x in fa.iter_mut() {
            *x = self.from_mont(self.mul(*x, n_inv));
        }
        fa
    }
}

fn primitive_root(p: u64) -> u64 {
    let factors = factorize(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Largest-first primes `p < 2^31` with `2^log_n | p - 1`, just enough that
/// their product exceeds `2^needed_bits`.
pub(crate) fn select_primes(log_n: u32, needed_bits: u64) -> Result<Vec<NttPrime>> {
    let step = 1u64 << log_n;
    let mut product = BigUint::one();
    let target = BigUint::one() << needed_bits;
    let mut out = Vec::new();
    let mut c = ((1u64 << 31) - 1) / step;
    while c >= 1 {
        let p = c * step + 1;
        if is_prime(p) {
            out.push(NttPrime::new(p as u32));
            product *= p;
            if product > target {
                return Ok(out);
            }
        }
        c -= 1;
    }
    Err(Error::ModulusInsufficient {
        needed_bits,
        available_bits: product.bits(),
        log_size: log_n,
    })
}

/// Garner reconstruction tables for a fixed prime set.
struct Crt {
    primes: Vec<u64>,
    /// `inv[i][j] = p_j^{-1} mod p_i` for `j < i`
    inv: Vec<Vec<u64>>,
    modulus: Vec<u32>,
    half: Vec<u32>,
}

impl Crt {
    fn new(primes: &[NttPrime]) -> Self {
        let primes: Vec<u64> = primes.iter().map(|q| q.modulus() as u64).collect();
        let inv = (0..primes.len())
            .map(|i| {
                (0..i)
                    .map(|j| pow_mod(primes[j] % primes[i], primes[i] - 2, primes[i]))
                    .collect()
            })
            .collect();
        let m: BigUint = primes.iter().product();
        let half: BigUint = &m >> 1u32;
        let limbs = primes.len() + 1;
        let pad = |x: BigUint| {
            let mut v = x.to_u32_digits();
            v.resize(limbs, 0);
            v
        };
        Crt {
            primes,
            inv,
            modulus: pad(m),
            half: pad(half),
        }
    }

    fn lift(&self, residues: &[u32]) -> BigInt {
        let k = self.primes.len();
        let mut digits = [0u64; 16];
        for i in 0..k {
            let p = self.primes[i];
            let mut x = residues[i] as u64;
            for j in 0..i {
                x = (x + p - digits[j] % p) % p * self.inv[i][j] % p;
            }
            digits[i] = x;
        }
        // Horner from the top digit: acc = d_{k-1}; acc = acc * p_i + d_i.
        let mut acc = vec![0u32; k + 1];
        acc[0] = digits[k - 1] as u32;
        for i in (0..k - 1).rev() {
            let mut carry = digits[i];
            for limb in acc.iter_mut() {
                let t = *limb as u64 * self.primes[i] + carry;
                *limb = t as u32;
                carry = t >> 32;
            }
            debug_assert_eq!(carry, 0);
        }
        if limbs_gt(&acc, &self.half) {
            let mut borrow = 0i64;
            for (limb, &m) in acc.iter_mut().zip(&self.modulus) {
                let t = m as i64 - *limb as i64 - borrow;
                *limb = t.rem_euclid(1 << 32) as u32;
                borrow = i64::from(t < 0);
            }
            BigInt::from_slice(Sign::Minus, &acc)
        } else {
            BigInt::from_slice(Sign::Plus, &acc)
        }
    }
}

fn limbs_gt(a: &[u32], b: &[u32]) -> bool {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        if x != y {
            return x > y;
        }
    }
    false
}

/// Exact truncated product via NTT/CRT.
///
/// `bound_bits` must satisfy `|c_n| < 2^bound_bits` for every output
/// coefficient; the CRT modulus is chosen to exceed `2^(bound_bits + 1)`.
pub(crate) fn convolve_exact(
    a: &[BigInt],
    b: &[BigInt],
    out_len: usize,
    bound_bits: u64,
) -> Result<Vec<BigInt>> {
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return Ok(vec![BigInt::zero(); out_len]);
    }
    let a = &a[..a.len().min(out_len)];
    let b = if std::ptr::eq(a.as_ptr(), b.as_ptr()) {
        a
    } else {
        &b[..b.len().min(out_len)]
    };
    let full = a.len() + b.len() - 1;
    let log_n = full.next_power_of_two().trailing_zeros();
    let primes = select_primes(log_n, bound_bits + 1)?;
    let crt = Crt::new(&primes);

    let residues: Vec<Vec<u32>> = if log_n >= SEQUENTIAL_LOG_SIZE {
        primes
            .iter()
            .map(|q| q.convolve(a, b, out_len.min(full), log_n))
            .collect()
    } else {
        primes
            .par_iter()
            .map(|q| q.convolve(a, b, out_len.min(full), log_n))
            .collect()
    };

    let k = primes.len();
    let mut out: Vec<BigInt> = (0..out_len.min(full))
        .into_par_iter()
        .map_init(
            || vec![0u32; k],
            |buf, i| {
                for (slot, r) in buf.iter_mut().zip(&residues) {
                    *slot = r[i];
                }
                crt.lift(buf)
            },
        )
        .collect();
    out.resize(out_len, BigInt::zero());
    Ok(out)
}
