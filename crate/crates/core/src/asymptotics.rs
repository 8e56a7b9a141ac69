//! Growth of `Σ_{n<=x} |value(n)|` for a coefficient stream.
//!
//! Every routine here is a single ordered pass with compensated summation,
//! so results do not depend on the thread count.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sympower::{StreamKind, SymCoefficientStream};

/// `δ_m = 1 − 4(m+1)/(π m (m+2)) · cot(π/(2(m+1)))`
pub fn delta_m(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mf = m as f64;
    let cot = 1.0 / (PI / (2.0 * (mf + 1.0))).tan();
    Ok(1.0 - 4.0 * (mf + 1.0) / (PI * mf * (mf + 2.0)) * cot)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub x: usize,
    /// `A(x) = Σ_{n<=x} |value(n)|`
    pub partial_sum: f64,
    /// `A(x) (log x)^{δ_m} / x`
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockIncrement {
    pub sigma: f64,
    pub j: u32,
    /// `Σ_{2^j < n <= 2^{j+1}} |value(n)| n^{-σ}`
    pub t_j: f64,
    /// `T_j / T_{j-1}`; absent for the first block of a probe
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub form: String,
    pub m: u32,
    pub kind: StreamKind,
    pub bound: usize,
    pub delta_m: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub block_increments: Vec<BlockIncrement>,
    /// `R(x)` at the largest checkpoint; an estimate of the leading constant,
    /// not a converged value
    pub constant_estimate: Option<f64>,
}

/// [`partial_sums`] over raw values `value(1), value(2), …`.
pub fn partial_sums_of<I>(values: I, bound: usize, delta: f64, checkpoints: &[usize]) -> Result<Vec<Checkpoint>>
where
    I: IntoIterator<Item = f64>,
{
    let mut xs = checkpoints.to_vec();
    xs.sort_unstable();
    xs.dedup();
    if let Some(&bad) = xs.iter().find(|&&x| x == 0 || x > bound) {
        return Err(Error::OutOfRange { index: bad, bound });
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = CompensatedSum::new();
    let mut next = xs.iter().peekable();
    for (n, v) in (1..=bound).zip(values) {
        if next.peek().is_none() {
            break;
        }
        sum.add(v.abs());
        if next.peek() == Some(&&n) {
            next.next();
            let a = sum.value();
            let ratio = a * (n as f64).ln().powf(delta) / n as f64;
            out.push(Checkpoint {
                x: n,
                partial_sum: a,
                ratio,
            });
        }
    }
    if out.len() != xs.len() {
        return Err(Error::InvalidArgument("value source ended early".into()));
    }
    Ok(out)
}

/// `A(x)` and `R(x)` at each checkpoint, in increasing `x`.
pub fn partial_sums(stream: &SymCoefficientStream, checkpoints: &[usize]) -> Result<AsymptoticsReport> {
    let delta = delta_m(stream.m())?;
    let cps = partial_sums_of(stream.values().map(|(_, v)| v), stream.bound(), delta, checkpoints)?;
    Ok(AsymptoticsReport {
        form: stream.form().name().to_string(),
        m: stream.m(),
        kind: stream.kind(),
        bound: stream.bound(),
        delta_m: delta,
        constant_estimate: cps.last().map(|c| c.ratio),
        checkpoints: cps,
        block_increments: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialSummation {
    /// `Σ_{n<=N} |value(n)| n^{-β}`
    pub lhs: f64,
    /// `A(N) N^{-β} + β ∫_1^N A(u) u^{-β-1} du`, integral taken over the step function
    pub rhs: f64,
    /// `|lhs − rhs| / lhs`
    pub residual: f64,
}

/// `n^{-β} − (n+1)^{-β}` without cancellation.
fn step_weight(n: f64, beta: f64) -> f64 {
    -(-beta * n.ln()).exp() * (-beta * (1.0 / n).ln_1p()).exp_m1()
}

/// [`partial_summation_check`] over raw values.
pub fn partial_summation_of<I>(values: I, beta: f64, n_max: usize) -> Result<PartialSummation>
where
    I: IntoIterator<Item = f64>,
{
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("β = {beta} must be positive")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let mut lhs = CompensatedSum::new();
    let mut integral = CompensatedSum::new();
    let mut a = CompensatedSum::new();
    let mut seen = 0;
    for (n, v) in (1..=n_max).zip(values) {
        let nf = n as f64;
        lhs.add(v.abs() * (-beta * nf.ln()).exp());
        a.add(v.abs());
        if n < n_max {
            integral.add(a.value() * step_weight(nf, beta));
        }
        seen = n;
    }
    if seen != n_max {
        return Err(Error::InvalidArgument("value source ended early".into()));
    }
    let lhs = lhs.value();
    let rhs = a.value() * (-beta * (n_max as f64).ln()).exp() + integral.value();
    Ok(PartialSummation {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs,
    })
}

/// Checks `Σ |a(n)| n^{-β} = A(N) N^{-β} + β ∫_1^N A(u) u^{-β-1} du`.
///
/// On `[n, n+1)` the integrand is `A(n) u^{-β-1}`, integrated in closed form.
pub fn partial_summation_check(stream: &SymCoefficientStream, beta: f64, n_max: usize) -> Result<PartialSummation> {
    if n_max > stream.bound() {
        return Err(Error::OutOfRange {
            index: n_max,
            bound: stream.bound(),
        });
    }
    partial_summation_of(stream.values().map(|(_, v)| v), beta, n_max)
}

/// [`abscissa_probe`] over raw values.
pub fn abscissa_probe_of<I>(values: I, bound: usize, sigma: f64, j_range: RangeInclusive<u32>) -> Result<Vec<BlockIncrement>>
where
    I: IntoIterator<Item = f64>,
{
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!("σ = {sigma} must be positive")));
    }
    let (j0, j1) = (*j_range.start(), *j_range.end());
    if j0 > j1 || j1 >= usize::BITS - 1 {
        return Err(Error::InvalidArgument(format!("bad block range {j0}..={j1}")));
    }
    let top = 1usize << (j1 + 1);
    if top > bound {
        return Err(Error::OutOfRange { index: top, bound });
    }
    let lo = 1usize << j0;
    let mut sums: Vec<CompensatedSum> = vec![CompensatedSum::new(); (j1 - j0 + 1) as usize];
    let mut seen = 0;
    for (n, v) in (1..=top).zip(values) {
        seen = n;
        if n <= lo {
            continue;
        }
        let j = (usize::BITS - 1 - (n - 1).leading_zeros()) as usize;
        sums[j - j0 as usize].add(v.abs() * (-sigma * (n as f64).ln()).exp());
    }
    if seen != top {
        return Err(Error::InvalidArgument("value source ended early".into()));
    }
    let mut out: Vec<BlockIncrement> = Vec::with_capacity(sums.len());
    for (i, s) in sums.iter().enumerate() {
        let t_j = s.value();
        let ratio = out.last().map(|prev| t_j / prev.t_j);
        out.push(BlockIncrement {
            sigma,
            j: j0 + i as u32,
            t_j,
            ratio,
        });
    }
    Ok(out)
}

/// Dyadic block sums `T_j` for `j` in `j_range`.
///
/// Growth of `Σ_{n<=N} |a(n)|` like `N^α` shows up as `T_{j+1}/T_j ≈ 2^{α−σ}`.
pub fn abscissa_probe(stream: &SymCoefficientStream, sigma: f64, j_range: RangeInclusive<u32>) -> Result<Vec<BlockIncrement>> {
    abscissa_probe_of(stream.values().map(|(_, v)| v), stream.bound(), sigma, j_range)
}

/// Geometric mean of the defined ratios of a probe.
pub fn geometric_mean_ratio(blocks: &[BlockIncrement]) -> Option<f64> {
    let logs: Vec<f64> = blocks.iter().filter_map(|b| b.ratio).map(f64::ln).collect();
    if logs.is_empty() {
        None
    } else {
        Some((logs.iter().sum::<f64>() / logs.len() as f64).exp())
    }
}
