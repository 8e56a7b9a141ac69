//! Sign densities of `{λ_f(p^m)}_p`, their closed forms, and tests of the
//! angle distribution.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::Sign;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CoefficientSeries;
use crate::hecke::{prime_power_sign, ThetaTable};
use crate::primes::primes_up_to;

/// `(positive, negative, zero)` densities or frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityTriple {
    pub positive: f64,
    pub negative: f64,
    pub zero: f64,
}

impl DensityTriple {
    pub fn sum(&self) -> f64 {
        self.positive + self.negative + self.zero
    }

    fn abs_diff(&self, other: &DensityTriple) -> DensityTriple {
        DensityTriple {
            positive: (self.positive - other.positive).abs(),
            negative: (self.negative - other.negative).abs(),
            zero: (self.zero - other.zero).abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignCounts {
    pub positive: u64,
    pub negative: u64,
    pub zero: u64,
}

impl SignCounts {
    pub fn total(&self) -> u64 {
        self.positive + self.negative + self.zero
    }

    fn merge(self, o: SignCounts) -> SignCounts {
        SignCounts {
            positive: self.positive + o.positive,
            negative: self.negative + o.negative,
            zero: self.zero + o.zero,
        }
    }
}

/// Limiting densities of the sets `λ_f(p^m) > 0`, `< 0`, `= 0` among primes.
pub fn predicted_density(m: u32, cm: bool) -> Result<DensityTriple> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mf = m as f64;
    let t = if cm {
        if m % 2 == 1 {
            DensityTriple {
                positive: 0.25,
                negative: 0.25,
                zero: 0.5,
            }
        } else {
            let pos = (mf + 2.0) / (4.0 * (mf + 1.0));
            let neg = mf / (4.0 * (mf + 1.0));
            if m % 4 == 0 {
                DensityTriple {
                    positive: pos + 0.5,
                    negative: neg,
                    zero: 0.0,
                }
            } else {
                DensityTriple {
                    positive: pos,
                    negative: neg + 0.5,
                    zero: 0.0,
                }
            }
        }
    } else if m % 2 == 1 {
        DensityTriple {
            positive: 0.5,
            negative: 0.5,
            zero: 0.0,
        }
    } else {
        let analytic = (PI / (mf + 1.0)).tan() / (2.0 * PI);
        DensityTriple {
            positive: (mf + 2.0) / (2.0 * (mf + 1.0)) - analytic,
            negative: mf / (2.0 * (mf + 1.0)) + analytic,
            zero: 0.0,
        }
    };
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignDensityReport {
    pub form: String,
    pub m: u32,
    pub x: usize,
    pub counts: SignCounts,
    /// counts over the number of primes `p <= X`, `p ∤ N`
    pub frequencies: DensityTriple,
    pub predicted: DensityTriple,
    pub abs_errors: DensityTriple,
}

/// Counts signs of `a_f(p^m)` over unramified `p <= X`, read exactly.
pub fn empirical_sign_density(series: &CoefficientSeries, m: u32, x: usize) -> Result<SignDensityReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if x > series.precision() {
        return Err(Error::OutOfRange {
            index: x,
            bound: series.precision(),
        });
    }
    let form = series.form();
    let primes: Vec<usize> = primes_up_to(x)
        .into_iter()
        .filter(|&p| !form.divides_level(p as u64))
        .collect();
    let counts = primes
        .par_iter()
        .map(|&p| {
            let mut c = SignCounts::default();
            match prime_power_sign(series, p, m).expect("p is a prime within range") {
                Sign::Plus => c.positive = 1,
                Sign::Minus => c.negative = 1,
                Sign::NoSign => c.zero = 1,
            }
            c
        })
        .reduce(SignCounts::default, SignCounts::merge);
    let n = counts.total().max(1) as f64;
    let frequencies = DensityTriple {
        positive: counts.positive as f64 / n,
        negative: counts.negative as f64 / n,
        zero: counts.zero as f64 / n,
    };
    let predicted = predicted_density(m, form.is_cm())?;
    Ok(SignDensityReport {
        form: form.name().to_string(),
        m,
        x,
        counts,
        frequencies,
        abs_errors: frequencies.abs_diff(&predicted),
        predicted,
    })
}

fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("angle {theta} outside [0, π]")))
    }
}

fn st_cdf(theta: f64) -> f64 {
    theta / PI - (2.0 * theta).sin() / (2.0 * PI)
}

/// `F(θ) = θ/π − sin(2θ)/(2π)`, the distribution function of `(2/π) sin²θ dθ`.
pub fn sato_tate_cdf(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    Ok(st_cdf(theta))
}

/// Inverse of [`sato_tate_cdf`] by bisection.
pub fn sato_tate_quantile(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("probability {u} outside [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if st_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Sato–Tate density `(2/π) sin²θ`.
pub fn sato_tate_density(theta: f64) -> f64 {
    let s = theta.sin();
    2.0 / PI * s * s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMeasure {
    SatoTate,
    Uniform,
}

/// Intervals of `(0, π)` on which `sin((m+1)θ) > 0`.
pub fn positivity_intervals(m: u32) -> Vec<(f64, f64)> {
    let w = PI / (m as f64 + 1.0);
    (0..=m / 2)
        .map(|j| (2.0 * j as f64 * w, ((2 * j + 1) as f64 * w).min(PI)))
        .collect()
}

/// Intervals of `(0, π)` on which `sin((m+1)θ) < 0`.
pub fn negativity_intervals(m: u32) -> Vec<(f64, f64)> {
    let w = PI / (m as f64 + 1.0);
    (0..m.div_ceil(2))
        .map(|j| ((2 * j + 1) as f64 * w, ((2 * j + 2) as f64 * w).min(PI)))
        .collect()
}

pub fn interval_measure(a: f64, b: f64, measure: AngleMeasure) -> f64 {
    match measure {
        AngleMeasure::SatoTate => st_cdf(b) - st_cdf(a),
        AngleMeasure::Uniform => (b - a) / PI,
    }
}

/// Measure of `{θ : λ_f(p^m) = sin((m+1)θ)/sin θ > 0}`.
pub fn measure_of_positivity_set(m: u32, measure: AngleMeasure) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    Ok(positivity_intervals(m)
        .into_iter()
        .map(|(a, b)| interval_measure(a, b, measure))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    SatoTate,
    /// half the mass uniform on `[0, π]`, half an atom at `π/2`
    DeuringMixture,
}

impl std::str::FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sato_tate" | "sato-tate" => Ok(Reference::SatoTate),
            "deuring_mixture" | "deuring-mixture" | "deuring" => Ok(Reference::DeuringMixture),
            _ => Err(Error::InvalidArgument(format!("unknown reference `{s}`"))),
        }
    }
}

impl Reference {
    pub fn for_cm(cm: bool) -> Self {
        if cm {
            Reference::DeuringMixture
        } else {
            Reference::SatoTate
        }
    }

    /// `F(θ) = P(Θ <= θ)`
    pub fn cdf(&self, theta: f64) -> f64 {
        match self {
            Reference::SatoTate => st_cdf(theta),
            Reference::DeuringMixture => {
                0.5 * theta / PI + if theta >= FRAC_PI_2 { 0.5 } else { 0.0 }
            }
        }
    }

    /// `F(θ-) = P(Θ < θ)`
    pub fn cdf_left(&self, theta: f64) -> f64 {
        match self {
            Reference::SatoTate => st_cdf(theta),
            Reference::DeuringMixture => 0.5 * theta / PI + if theta > FRAC_PI_2 { 0.5 } else { 0.0 },
        }
    }

    fn atoms(&self) -> &'static [f64] {
        match self {
            Reference::SatoTate => &[],
            Reference::DeuringMixture => &[FRAC_PI_2],
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            Reference::SatoTate => sato_tate_quantile(u),
            Reference::DeuringMixture => {
                if !(0.0..=1.0).contains(&u) {
                    return Err(Error::InvalidArgument(format!("probability {u} outside [0, 1]")));
                }
                Ok(if u < 0.25 {
                    2.0 * PI * u
                } else if u <= 0.75 {
                    FRAC_PI_2
                } else {
                    2.0 * PI * (u - 0.5)
                })
            }
        }
    }

    /// `n` inverse-CDF draws.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| self.quantile(rng.random::<f64>()).expect("u in [0, 1)"))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionTestReport {
    pub form: String,
    pub x: usize,
    pub ks_statistic: f64,
    pub reference: Reference,
    pub sample_size: usize,
}

/// `sup |F_n − F|` for an arbitrary sample against `reference`.
///
/// Both the empirical and the reference distribution functions are compared
/// through their left and right limits at every sample value and every atom,
/// so ties and jumps are handled.
pub fn ks_statistic(sample: &[f64], reference: Reference) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let mut xs = sample.to_vec();
    if xs.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("sample contains NaN".into()));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut points: Vec<f64> = xs.clone();
    points.extend_from_slice(reference.atoms());
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut d = 0.0f64;
    let mut below = 0usize;
    for t in points {
        while below < xs.len() && xs[below] < t {
            below += 1;
        }
        let mut upto = below;
        while upto < xs.len() && xs[upto] == t {
            upto += 1;
        }
        let left = (below as f64 / n - reference.cdf_left(t)).abs();
        let right = (upto as f64 / n - reference.cdf(t)).abs();
        d = d.max(left).max(right);
    }
    Ok(d.min(1.0))
}

pub fn ks_test(table: &ThetaTable, reference: Reference) -> Result<DistributionTestReport> {
    let thetas = table.thetas();
    Ok(DistributionTestReport {
        form: table.form().name().to_string(),
        x: table.bound(),
        ks_statistic: ks_statistic(&thetas, reference)?,
        reference,
        sample_size: thetas.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// reference probability of the bin
    pub reference_mass: f64,
}

/// Equal-width bins over `[0, π]`; bins are `[l, r)` except the last.
pub fn histogram(thetas: &[f64], bins: usize, reference: Reference) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let w = PI / bins as f64;
    let mut counts = vec![0u64; bins];
    for &t in thetas {
        check_angle(t)?;
        let i = ((t / w) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let l = i as f64 * w;
            let r = if i + 1 == bins { PI } else { (i + 1) as f64 * w };
            let upper = if i + 1 == bins {
                reference.cdf(r)
            } else {
                reference.cdf_left(r)
            };
            HistogramBin {
                bin_left: l,
                bin_right: r,
                count,
                reference_mass: upper - reference.cdf_left(l),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{expand, FormDescriptor};
    use crate::hecke::{theta_table, ThetaTable};
    use proptest::{prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson_st(a: f64, b: f64) -> f64 {
        simpson(sato_tate_density, a, b, 10_000)
    }

    #[test]
    fn predicted_examples() {
        let t = predicted_density(1, false).unwrap();
        assert_eq!((t.positive, t.negative, t.zero), (0.5, 0.5, 0.0));
        let t = predicted_density(2, false).unwrap();
        assert!((t.positive - 0.3910022189557707).abs() < 1e-12);
        assert!((t.negative - 0.6089977810442293).abs() < 1e-12);
        let t = predicted_density(4, false).unwrap();
        assert!((t.positive - 0.48436716530146495).abs() < 1e-12);
        let t = predicted_density(2, true).unwrap();
        assert!((t.positive - 1.0 / 3.0).abs() < 1e-15 && (t.negative - 2.0 / 3.0).abs() < 1e-15);
        let t = predicted_density(4, true).unwrap();
        assert!((t.positive - 0.8).abs() < 1e-15 && (t.negative - 0.2).abs() < 1e-15);
        let t = predicted_density(3, true).unwrap();
        assert_eq!((t.positive, t.negative, t.zero), (0.25, 0.25, 0.5));
        assert!(predicted_density(0, false).is_err());
    }

    #[test]
    fn predicted_triples_are_distributions() {
        for m in 1..=100 {
            for cm in [false, true] {
                let t = predicted_density(m, cm).unwrap();
                assert!(t.positive >= 0.0 && t.negative >= 0.0 && t.zero >= 0.0);
                assert!((t.sum() - 1.0).abs() < 1e-12, "m={m} cm={cm}");
            }
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(sato_tate_cdf(0.0).unwrap(), 0.0);
        assert!((sato_tate_cdf(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((sato_tate_cdf(FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
        let third = sato_tate_cdf(PI / 3.0).unwrap();
        assert!((third - 0.1955011094778853).abs() < 1e-12);
        assert!((third - simpson_st(0.0, PI / 3.0)).abs() < 1e-10);
        assert!(sato_tate_cdf(-0.1).is_err());
        assert!(sato_tate_cdf(3.2).is_err());
    }

    #[test]
    fn positivity_measure_is_closed_form_density() {
        for m in 1..=50 {
            let st = measure_of_positivity_set(m, AngleMeasure::SatoTate).unwrap();
            let want = predicted_density(m, false).unwrap().positive;
            assert!((st - want).abs() < 1e-10, "m={m}");
            let oracle: f64 = positivity_intervals(m).iter().map(|&(a, b)| simpson_st(a, b)).sum();
            assert!((st - oracle).abs() < 1e-8, "m={m}");
            if m % 2 == 1 {
                let neg: f64 = negativity_intervals(m)
                    .iter()
                    .map(|&(a, b)| interval_measure(a, b, AngleMeasure::SatoTate))
                    .sum();
                assert!((st - neg).abs() < 1e-10);
            }
        }
        assert_eq!(measure_of_positivity_set(1, AngleMeasure::Uniform).unwrap(), 0.5);
    }

    #[test]
    fn positivity_intervals_match_sign_of_sine() {
        for m in 1..=12 {
            let pos = positivity_intervals(m);
            let neg = negativity_intervals(m);
            for i in 1..1000 {
                let t = PI * i as f64 / 1000.0;
                let s = ((m + 1) as f64 * t).sin();
                if s.abs() < 1e-9 {
                    continue;
                }
                let in_pos = pos.iter().any(|&(a, b)| a < t && t < b);
                let in_neg = neg.iter().any(|&(a, b)| a < t && t < b);
                assert_eq!(in_pos, s > 0.0);
                assert_eq!(in_neg, s < 0.0);
            }
        }
    }

    #[test]
    fn simpson_agrees_with_closed_form_on_random_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let a = rng.random_range(0.0..PI);
            let b = rng.random_range(a..=PI);
            let closed = interval_measure(a, b, AngleMeasure::SatoTate);
            assert!((closed - simpson(sato_tate_density, a, b, 1000)).abs() < 1e-8);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let t = sato_tate_quantile(u).unwrap();
            assert!((st_cdf(t) - u).abs() < 1e-12);
        }
    }

    /// Brute-force sup over a fine grid plus the sample points.
    fn ks_oracle(sample: &[f64], r: Reference) -> f64 {
        let n = sample.len() as f64;
        let ecdf = |t: f64, strict: bool| {
            sample.iter().filter(|&&v| if strict { v < t } else { v <= t }).count() as f64 / n
        };
        let mut pts: Vec<f64> = (0..=20_000).map(|i| PI * i as f64 / 20_000.0).collect();
        pts.extend_from_slice(sample);
        pts.push(FRAC_PI_2);
        pts.iter()
            .map(|&t| {
                (ecdf(t, false) - r.cdf(t))
                    .abs()
                    .max((ecdf(t, true) - r.cdf_left(t)).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in [Reference::SatoTate, Reference::DeuringMixture] {
            for n in [1usize, 2, 7, 50] {
                let mut s = r.sample(n, &mut rng);
                s.push(FRAC_PI_2);
                let got = ks_statistic(&s, r).unwrap();
                let want = ks_oracle(&s, r);
                assert!((got - want).abs() < 1e-3 && got >= want - 1e-12, "{r:?} n={n}");
            }
        }
    }

    #[test]
    fn ks_self_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for r in [Reference::SatoTate, Reference::DeuringMixture] {
            let s = r.sample(100_000, &mut rng);
            assert!(ks_statistic(&s, r).unwrap() <= 0.01);
        }
        // all mass on the atom: the uniform half is missed on both sides
        let d = ks_statistic(&[FRAC_PI_2; 10], Reference::DeuringMixture).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        let d = ks_statistic(&[0.0; 4], Reference::SatoTate).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_form_counts_partition_primes() {
        for form in FormDescriptor::builtins() {
            let s = expand(&form, 100).unwrap();
            let ramified = primes_up_to(100)
                .into_iter()
                .filter(|&p| form.divides_level(p as u64))
                .count() as u64;
            for m in 1..=4 {
                let r = empirical_sign_density(&s, m, 100).unwrap();
                assert_eq!(r.counts.total(), 25 - ramified);
                assert!((r.frequencies.sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cm_odd_powers_vanish_on_inert_primes() {
        let s = expand(&FormDescriptor::lvl32(), 2000).unwrap();
        let r1 = empirical_sign_density(&s, 1, 2000).unwrap();
        let r3 = empirical_sign_density(&s, 3, 2000).unwrap();
        assert_eq!(r1.counts.zero, r3.counts.zero);
        assert!(r1.counts.zero > 0);
        assert!(empirical_sign_density(&s, 1, 2001).is_err());
    }

    #[test]
    fn histogram_masses() {
        let table = theta_table(&expand(&FormDescriptor::lvl32(), 3000).unwrap());
        for r in [Reference::SatoTate, Reference::DeuringMixture] {
            let h = histogram(&table.thetas(), 50, r).unwrap();
            assert_eq!(h.iter().map(|b| b.count).sum::<u64>(), table.len() as u64);
            assert!((h.iter().map(|b| b.reference_mass).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let h = histogram(&[FRAC_PI_2], 2, Reference::DeuringMixture).unwrap();
        assert_eq!(h[1].count, 1);
        assert!((h[1].reference_mass - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ks_on_synthetic_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let angles: Vec<(usize, f64)> = Reference::SatoTate
            .sample(20_000, &mut rng)
            .into_iter()
            .enumerate()
            .map(|(i, t)| (i + 2, t))
            .collect();
        let table = ThetaTable::from_angles(FormDescriptor::delta(), &angles).unwrap();
        let r = ks_test(&table, Reference::SatoTate).unwrap();
        assert_eq!(r.sample_size, 20_000);
        assert!(r.ks_statistic < 0.02);
    }

    proptest! {
        #[test]
        fn ks_in_unit_interval(v in proptest::collection::vec(0.0..=PI, 1..200)) {
            for r in [Reference::SatoTate, Reference::DeuringMixture] {
                let d = ks_statistic(&v, r).unwrap();
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }

        #[test]
        fn cdf_is_monotone(a in 0.0..=PI, b in 0.0..=PI) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for r in [Reference::SatoTate, Reference::DeuringMixture] {
                prop_assert!(r.cdf(lo) <= r.cdf(hi) + 1e-15);
                prop_assert!(r.cdf_left(lo) <= r.cdf(lo));
            }
        }
    }
}
