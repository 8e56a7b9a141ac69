//! Prime-power eigenvalues and Satake angles.
//!
//! Two independent routes to `λ_f(p^m)`:
//! the exact integer recursion `a(p^{j+1}) = a(p) a(p^j) - p^{k-1} a(p^{j-1})`
//! (signs are always read from this one), and the float evaluation
//! `sin((m+1)θ_p) / sin θ_p = U_m(cos θ_p)` from the angle.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::{BigInt, Sign};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::forms::{CoefficientSeries, FormDescriptor};
use crate::numeric::normalize;
use crate::primes::{is_prime, primes_up_to};

/// Below this `sin θ` the quotient formula is replaced by the U-recurrence.
const SMALL_SINE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaEntry {
    pub p: usize,
    /// `λ_f(p) = 2 cos θ_p`
    pub lambda: f64,
    /// `θ_p ∈ [0, π]`
    pub theta: f64,
}

/// Satake angles for every unramified prime up to a bound.
#[derive(Clone, Debug)]
pub struct ThetaTable {
    form: FormDescriptor,
    bound: usize,
    entries: Vec<ThetaEntry>,
    /// `(p, λ_f(p))` for primes `p | N`, `p <= bound`
    ramified: Vec<(usize, f64)>,
    clamp_events: usize,
}

impl ThetaTable {
    pub fn form(&self) -> &FormDescriptor {
        &self.form
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn entries(&self) -> &[ThetaEntry] {
        &self.entries
    }

    pub fn ramified(&self) -> &[(usize, f64)] {
        &self.ramified
    }

    /// Number of `|λ_f(p)/2| > 1` values that were clamped before `acos`.
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, p: usize) -> Option<&ThetaEntry> {
        self.entries
            .binary_search_by_key(&p, |e| e.p)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.theta).collect()
    }

    /// Entries restricted to `p <= bound`.
    pub fn truncated(&self, bound: usize) -> ThetaTable {
        let cut = self.entries.partition_point(|e| e.p <= bound);
        ThetaTable {
            form: self.form.clone(),
            bound: bound.min(self.bound),
            entries: self.entries[..cut].to_vec(),
            ramified: self.ramified.iter().copied().filter(|&(p, _)| p <= bound).collect(),
            clamp_events: self.clamp_events,
        }
    }

    /// A table of synthetic angles, for harness checks.
    pub fn from_angles(form: FormDescriptor, angles: &[(usize, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(angles.len());
        for &(p, theta) in angles {
            if !(0.0..=PI).contains(&theta) {
                return Err(Error::InvalidArgument(format!("angle {theta} outside [0, π]")));
            }
            entries.push(ThetaEntry {
                p,
                lambda: 2.0 * theta.cos(),
                theta,
            });
        }
        entries.sort_by_key(|e| e.p);
        let bound = entries.last().map_or(0, |e| e.p);
        Ok(ThetaTable {
            form,
            bound,
            entries,
            ramified: Vec::new(),
            clamp_events: 0,
        })
    }
}

/// `θ_p = arccos(clamp(λ_f(p)/2))` for unramified `p <= X`.
///
/// Exact zeros `a_f(p) = 0` map to `π/2` exactly.
pub fn theta_table(series: &CoefficientSeries) -> ThetaTable {
    let form = series.form().clone();
    let shift = form.half_weight_shift();
    let mut entries = Vec::new();
    let mut ramified = Vec::new();
    let mut clamp_events = 0;
    for p in primes_up_to(series.precision()) {
        let a = series.a(p).expect("p <= X");
        let lambda = normalize(a, p as u64, shift);
        if form.divides_level(p as u64) {
            ramified.push((p, lambda));
            continue;
        }
        let theta = if a.is_zero() {
            FRAC_PI_2
        } else {
            let half = lambda / 2.0;
            if half.abs() > 1.0 {
                clamp_events += 1;
            }
            half.clamp(-1.0, 1.0).acos()
        };
        entries.push(ThetaEntry { p, lambda, theta });
    }
    ThetaTable {
        form,
        bound: series.precision(),
        entries,
        ramified,
        clamp_events,
    }
}

/// `λ_f(p^m)` with its exact numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimePowerValue {
    pub p: usize,
    pub m: u32,
    /// `a_f(p^m)`
    pub a_value: BigInt,
    /// `a_f(p^m) / p^{m(k-1)/2}`
    pub lambda_value: f64,
    pub sign: Sign,
}

/// `a_f(p^j)` for `j = 0..=m`.
///
/// Unramified: three-term Hecke recursion. Ramified: `a_f(p)^j`.
pub fn prime_power_sequence(series: &CoefficientSeries, p: usize, m: u32) -> Result<Vec<BigInt>> {
    if !is_prime(p as u64) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let ap = series.a(p)?.clone();
    let mut out = Vec::with_capacity(m as usize + 1);
    out.push(BigInt::from(1));
    if m == 0 {
        return Ok(out);
    }
    out.push(ap.clone());
    if series.form().divides_level(p as u64) {
        for j in 2..=m as usize {
            let next = &out[j - 1] * &ap;
            out.push(next);
        }
    } else {
        let pk1 = BigInt::from(p).pow(series.form().weight() - 1);
        for j in 2..=m as usize {
            let next = &ap * &out[j - 1] - &pk1 * &out[j - 2];
            out.push(next);
        }
    }
    Ok(out)
}

pub fn lambda_prime_power_exact(series: &CoefficientSeries, p: usize, m: u32) -> Result<PrimePowerValue> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let a_value = prime_power_sequence(series, p, m)?.pop().expect("m >= 1");
    let lambda_value = normalize(&a_value, p as u64, m as f64 * series.form().half_weight_shift());
    Ok(PrimePowerValue {
        p,
        m,
        sign: a_value.sign(),
        a_value,
        lambda_value,
    })
}

/// Sign of `a_f(p^m)`, read exactly. Cheaper than the full value when only
/// the sign is needed.
pub fn prime_power_sign(series: &CoefficientSeries, p: usize, m: u32) -> Result<Sign> {
    Ok(prime_power_sequence(series, p, m)?[m as usize].sign())
}

/// `U_n(cos θ)` by the three-term recurrence; `U_0 = 1`.
pub(crate) fn chebyshev_u(theta: f64, n: u32) -> f64 {
    let x = theta.cos();
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Unchecked `sin((n+1)θ)/sin θ`, any `n >= 0`.
pub(crate) fn sine_ratio(theta: f64, n: u32) -> f64 {
    if theta.sin() < SMALL_SINE {
        if theta == 0.0 {
            return (n + 1) as f64;
        }
        if theta == PI {
            let v = (n + 1) as f64;
            return if n % 2 == 0 { v } else { -v };
        }
        chebyshev_u(theta, n)
    } else {
        ((n as f64 + 1.0) * theta).sin() / theta.sin()
    }
}

/// `λ_f(p^m) = sin((m+1)θ) / sin θ`, with `m+1` at `θ = 0` and
/// `(-1)^m (m+1)` at `θ = π`.
pub fn lambda_prime_power_chebyshev(theta: f64, m: u32) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ = {theta} outside [0, π]")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    Ok(sine_ratio(theta, m))
}
