//! Exact integer power series truncated at a fixed precision.
//!
//! Dense series hold `BigInt` coefficients for `q^0..=q^X`. Products come in
//! three flavours: [`mul_schoolbook`] (the reference), [`mul_ntt`] (multi-prime
//! transform with CRT lifting under a proven magnitude bound) and
//! [`mul_sparse`] for a dense series times a sparse one.

mod ntt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense series `Σ_{n=0}^{X} c_n q^n` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    coeffs: Vec<BigInt>,
}

impl IntSeries {
    pub fn zero(precision: usize) -> Self {
        IntSeries {
            coeffs: vec![BigInt::zero(); precision + 1],
        }
    }

    pub fn one(precision: usize) -> Self {
        let mut s = Self::zero(precision);
        s.coeffs[0] = BigInt::from(1);
        s
    }

    /// Builds a series whose precision is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "a series needs at least the constant coefficient".into(),
            ));
        }
        Ok(IntSeries { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Option<&BigInt> {
        self.coeffs.get(n)
    }

    /// Drops every power above `precision` (no-op if already shorter).
    pub fn truncate(mut self, precision: usize) -> Self {
        self.coeffs.truncate(precision + 1);
        self
    }

    /// Substitutes `q -> q^d`, keeping powers up to `precision`.
    pub fn dilate(&self, d: usize, precision: usize) -> Self {
        assert!(d >= 1, "dilation factor must be positive");
        let mut out = Self::zero(precision);
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i * d;
            if j > precision {
                break;
            }
            out.coeffs[j] = c.clone();
        }
        out
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Bit length of the largest `|c_n|`.
    pub fn max_abs_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }
}

/// Sparse series: strictly increasing exponents, no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSeries {
    terms: Vec<(usize, i64)>,
}

impl SparseSeries {
    pub fn new(terms: Vec<(usize, i64)>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(
                "sparse series exponents must be strictly increasing".into(),
            ));
        }
        if terms.iter().any(|&(_, c)| c == 0) {
            return Err(Error::InvalidArgument(
                "sparse series must not store zero coefficients".into(),
            ));
        }
        Ok(SparseSeries { terms })
    }

    pub fn terms(&self) -> &[(usize, i64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self, precision: usize) -> IntSeries {
        let mut out = IntSeries::zero(precision);
        for &(e, c) in &self.terms {
            if e <= precision {
                out.coeffs[e] = BigInt::from(c);
            }
        }
        out
    }

    /// Substitutes `q -> q^d`.
    pub fn dilate(&self, d: usize) -> SparseSeries {
        SparseSeries {
            terms: self.terms.iter().map(|&(e, c)| (e * d, c)).collect(),
        }
    }

    fn abs_sum_bits(&self) -> u64 {
        let s: u128 = self.terms.iter().map(|&(_, c)| c.unsigned_abs() as u128).sum();
        128 - s.leading_zeros() as u64
    }
}

/// Sparse expansion of `Π_{n≥1} (1 - q^n)^r` up to `q^precision`, for `r ∈ {1, 3}`.
///
/// `r = 1` is Euler's pentagonal-number series, `r = 3` Jacobi's
/// `Σ (-1)^k (2k+1) q^{k(k+1)/2}`. The `q^{r/24}` prefactor of `η^r` is not
/// included.
pub fn eta_power_series(r: u32, precision: usize) -> Result<SparseSeries> {
    if precision < 1 {
        return Err(Error::InvalidArgument("precision must be at least 1".into()));
    }
    let mut terms = Vec::new();
    match r {
        1 => {
            terms.push((0, 1));
            for k in 1usize.. {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let lo = k * (3 * k - 1) / 2;
                let hi = k * (3 * k + 1) / 2;
                if lo > precision {
                    break;
                }
                terms.push((lo, sign));
                if hi <= precision {
                    terms.push((hi, sign));
                }
            }
        }
        3 => {
            for k in 0usize.. {
                let e = k * (k + 1) / 2;
                if e > precision {
                    break;
                }
                let c = (2 * k + 1) as i64;
                terms.push((e, if k % 2 == 0 { c } else { -c }));
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "eta power series is available for r = 1 or 3, not {r}"
            )))
        }
    }
    SparseSeries::new(terms)
}

/// Reference product: direct Cauchy convolution over nonzero terms.
pub fn mul_schoolbook(a: &IntSeries, b: &IntSeries) -> IntSeries {
    let prec = a.precision().min(b.precision());
    let mut out = IntSeries::zero(prec);
    let nz_b: Vec<(usize, &BigInt)> = b
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    for (i, ca) in a.coeffs.iter().enumerate().take(prec + 1) {
        if ca.is_zero() {
            continue;
        }
        for &(j, cb) in &nz_b {
            if i + j > prec {
                break;
            }
            out.coeffs[i + j] += ca * cb;
        }
    }
    out
}

/// Transform-based product.
///
/// The CRT modulus is sized from the proven bound
/// `|c_n| ≤ min(nnz(a), nnz(b)) · max|a| · max|b|`; if no prime set covers
/// it, [`Error::ModulusInsufficient`] is returned.
pub fn mul_ntt(a: &IntSeries, b: &IntSeries) -> Result<IntSeries> {
    let prec = a.precision().min(b.precision());
    let a_trunc = &a.coeffs[..=prec];
    let same = std::ptr::eq(a, b);
    let b_trunc = if same { a_trunc } else { &b.coeffs[..=prec] };
    let terms = a.nonzero_count().min(b.nonzero_count()) as u64;
    let count_bits = 64 - terms.leading_zeros() as u64;
    let bound_bits = a.max_abs_bits() + b.max_abs_bits() + count_bits;
    let coeffs = ntt::convolve_exact(a_trunc, b_trunc, prec + 1, bound_bits)?;
    Ok(IntSeries { coeffs })
}

/// Product dispatching to the schoolbook path for small or very sparse
/// operands and to the transform path otherwise.
pub fn mul(a: &IntSeries, b: &IntSeries) -> Result<IntSeries> {
    let prec = a.precision().min(b.precision());
    let work = a.nonzero_count().min(prec + 1) as u64 * b.nonzero_count().min(prec + 1) as u64;
    let transform_cost = 64 * (prec as u64 + 1) * (64 - (prec as u64 + 1).leading_zeros() as u64);
    if prec < 64 || work <= transform_cost {
        Ok(mul_schoolbook(a, b))
    } else {
        mul_ntt(a, b)
    }
}

/// `a^e` by repeated squaring.
pub fn pow(a: &IntSeries, mut e: u32) -> Result<IntSeries> {
    let mut acc = IntSeries::one(a.precision());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base)?;
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base)?;
        }
    }
    Ok(acc)
}

/// Dense times sparse in `O(nnz(a) · #terms(b))`, result at `a`'s precision.
///
/// Accumulates in `i128` whenever `max|a| · Σ|b|` provably fits, otherwise in
/// `BigInt`.
pub fn mul_sparse(a: &IntSeries, b: &SparseSeries) -> IntSeries {
    let prec = a.precision();
    if a.max_abs_bits() + b.abs_sum_bits() <= 126 {
        let mut acc = vec![0i128; prec + 1];
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ca = ca.to_i128().expect("bounded by max_abs_bits");
            for &(e, cb) in &b.terms {
                if i + e > prec {
                    break;
                }
                acc[i + e] += ca * cb as i128;
            }
        }
        return IntSeries {
            coeffs: acc.into_iter().map(BigInt::from).collect(),
        };
    }
    let mut out = IntSeries::zero(prec);
    for (i, ca) in a.coeffs.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for &(e, cb) in &b.terms {
            if i + e > prec {
                break;
            }
            out.coeffs[i + e] += ca * cb;
        }
    }
    out
}

/// Largest `|c_n|` as a float, for diagnostics.
pub fn max_abs_f64(s: &IntSeries) -> f64 {
    s.coeffs
        .iter()
        .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
