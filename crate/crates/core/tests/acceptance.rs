//! End-to-end acceptance run at desk scale (X around 10^6).
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any fail.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::Sign;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use symsign::asymptotics::{abscissa_probe, geometric_mean_ratio, partial_summation_check, partial_sums};
use symsign::forms::checks::{deligne_violations, hecke_p2_violations, multiplicativity_violations};
use symsign::forms::{expand, CoefficientSeries, FormDescriptor};
use symsign::hecke::{lambda_prime_power_chebyshev, lambda_prime_power_exact, theta_table, ThetaTable};
use symsign::primes::{gcd, primes_up_to};
use symsign::stats::{
    empirical_sign_density, interval_measure, ks_statistic, ks_test, measure_of_positivity_set,
    negativity_intervals, positivity_intervals, predicted_density, simpson, sato_tate_density, AngleMeasure,
    Reference,
};
use symsign::sympower::{assemble_multiplicative, divisor_bound_table, StreamKind};

const X: usize = 1_000_000;
/// Dyadic blocks j = 14..=19 reach 2^20.
const X_DYADIC: usize = 1 << 20;

struct Expanded {
    series: CoefficientSeries,
    elapsed: Duration,
}

fn expanded(form: &str) -> &'static Expanded {
    static DELTA: OnceLock<Expanded> = OnceLock::new();
    static L11: OnceLock<Expanded> = OnceLock::new();
    static L27: OnceLock<Expanded> = OnceLock::new();
    static L32: OnceLock<Expanded> = OnceLock::new();
    let (cell, x) = match form {
        "delta" => (&DELTA, X_DYADIC),
        "lvl11" => (&L11, X),
        "lvl27" => (&L27, X),
        "lvl32" => (&L32, X),
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let t = Instant::now();
        let series = expand(&FormDescriptor::by_name(form).unwrap(), x).unwrap();
        Expanded {
            series,
            elapsed: t.elapsed(),
        }
    })
}

fn series(form: &str) -> &'static CoefficientSeries {
    &expanded(form).series
}

fn thetas(form: &str) -> &'static ThetaTable {
    static T: OnceLock<Vec<(String, ThetaTable)>> = OnceLock::new();
    let all = T.get_or_init(|| {
        ["delta", "lvl11", "lvl27", "lvl32"]
            .iter()
            .map(|f| (f.to_string(), theta_table(series(f)).truncated(X)))
            .collect()
    });
    &all.iter().find(|(n, _)| n == form).unwrap().1
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Schoolbook `q Π (1 - q^{dn})^e` mod 2^128, exact for the first few hundred terms.
fn schoolbook(recipe: &[(usize, u32)], len: usize) -> Vec<i128> {
    let mut poly = vec![0i128; len];
    poly[0] = 1;
    for &(d, e) in recipe {
        for n in 1..len {
            let step = d * n;
            if step >= len {
                break;
            }
            for _ in 0..e {
                for i in (step..len).rev() {
                    poly[i] = poly[i].wrapping_sub(poly[i - step]);
                }
            }
        }
    }
    poly
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let delta = expand(&FormDescriptor::delta(), 7).unwrap();
    let first: Vec<i64> = delta.coefficients().iter().map(|c| c.try_into().unwrap()).collect();
    let table_ok = first == [1, -24, 252, -1472, 4830, -6048, -16744];
    let oracle = schoolbook(&[(1, 24)], 7);
    let oracle_ok = oracle.iter().zip(&first).all(|(o, f)| *o == *f as i128);

    let x = 100_000;
    let mut bad = Vec::new();
    for form in FormDescriptor::builtins() {
        let s = expand(&form, x).unwrap();
        let pairs: Vec<(usize, usize)> = (2..=x / 2)
            .flat_map(|m| (m..=x / m).filter(move |&n| gcd(m as u64, n as u64) == 1).map(move |n| (m, n)))
            .collect();
        let mult = multiplicativity_violations(&s, &pairs);
        let hecke = hecke_p2_violations(&s);
        if !mult.is_empty() || !hecke.is_empty() {
            bad.push(format!("{}: {} mult, {} hecke", form.name(), mult.len(), hecke.len()));
        }
    }
    let elapsed = t.elapsed();
    let pass = table_ok && oracle_ok && bad.is_empty() && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "delta a(1..7) {}, oracle {}, multiplicativity + p^2 Hecke at X=1e5 {}, {:.1}s",
            ok(table_ok),
            ok(oracle_ok),
            if bad.is_empty() { "exact for all forms".into() } else { bad.join("; ") },
            elapsed.as_secs_f64()
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISMATCH"
    }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut expansion = Duration::ZERO;
    let mut violations = Vec::new();
    for f in ["delta", "lvl11", "lvl27", "lvl32"] {
        let e = expanded(f);
        expansion += e.elapsed;
        let v = deligne_violations(&e.series, X);
        if !v.is_empty() {
            violations.push(format!("{f}: {:?}", &v[..v.len().min(5)]));
        }
    }
    let total = expansion + t.elapsed();
    outcome(
        violations.is_empty() && total < Duration::from_secs(300),
        format!(
            "a(p)^2 <= 4p^(k-1) for unramified p <= 1e6: {}; {:.1}s including expansion",
            if violations.is_empty() { "no violations".into() } else { violations.join("; ") },
            total.as_secs_f64()
        ),
    )
}

fn sign_density_values(form: &str, ms: &[u32]) -> Vec<[f64; 3]> {
    ms.iter()
        .map(|&m| {
            let r = empirical_sign_density(series(form), m, X).unwrap();
            [r.frequencies.positive, r.frequencies.negative, r.frequencies.zero]
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let targets = [0.5, 0.391002, 0.5, 0.484367];
    let freqs = sign_density_values("delta", &[1, 2, 3, 4]);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, f) in freqs.iter().enumerate() {
        let m = i as u32 + 1;
        let closed = predicted_density(m, false).unwrap().positive;
        let good = (f[0] - targets[i]).abs() <= 0.01 && (f[0] - closed).abs() <= 0.01 && f[2] <= 0.01;
        pass &= good;
        parts.push(format!("m={m} pos {:.4} (want {:.6}) zero {:.4}", f[0], closed, f[2]));
    }
    outcome(pass, format!("delta X=1e6: {}", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let want = [(1, [0.25, 0.25, 0.5]), (2, [1.0 / 3.0, 2.0 / 3.0, 0.0]), (4, [0.8, 0.2, 0.0])];
    let mut pass = true;
    let mut parts = Vec::new();
    for form in ["lvl32", "lvl27"] {
        let freqs = sign_density_values(form, &[1, 2, 4]);
        for ((m, w), f) in want.iter().zip(&freqs) {
            let predicted = predicted_density(*m, true).unwrap();
            let closed = [predicted.positive, predicted.negative, predicted.zero];
            let good = (0..3).all(|i| (f[i] - w[i]).abs() <= 0.01 && (closed[i] - w[i]).abs() < 1e-12);
            pass &= good;
            parts.push(format!("{form} m={m} ({:.4}, {:.4}, {:.4})", f[0], f[1], f[2]));
        }
    }
    outcome(pass, parts.join(", "))
}

fn ks_values() -> [f64; 3] {
    let st = ks_test(thetas("delta"), Reference::SatoTate).unwrap().ks_statistic;
    let de = ks_test(thetas("lvl32"), Reference::DeuringMixture).unwrap().ks_statistic;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let synthetic = Reference::SatoTate.sample(100_000, &mut rng);
    let syn = ks_statistic(&synthetic, Reference::SatoTate).unwrap();
    [st, de, syn]
}

fn criterion_5() -> Outcome {
    let [st, de, syn] = ks_values();
    outcome(
        st <= 0.02 && de <= 0.02 && syn <= 0.01,
        format!(
            "KS delta vs Sato-Tate {st:.5} (n={}), lvl32 vs Deuring mixture {de:.5} (n={}), synthetic {syn:.5}",
            thetas("delta").len(),
            thetas("lvl32").len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (fi, f) in ["delta", "lvl11", "lvl27", "lvl32"].iter().enumerate() {
        let s = series(f);
        let table = thetas(f);
        let primes: Vec<usize> = primes_up_to(10_000)
            .into_iter()
            .filter(|&p| !s.form().divides_level(p as u64))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(600 + fi as u64);
        let mut worst = 0.0f64;
        let mut sign_mismatch = 0;
        for _ in 0..10_000 {
            let p = primes[rng.random_range(0..primes.len())];
            let m = rng.random_range(1..=10u32);
            let exact = lambda_prime_power_exact(s, p, m).unwrap();
            let float = lambda_prime_power_chebyshev(table.get(p).unwrap().theta, m).unwrap();
            let err = (float - exact.lambda_value).abs() / exact.lambda_value.abs().max(1.0);
            worst = worst.max(err);
            if exact.lambda_value.abs() > 1e-6 {
                let fs = if float > 0.0 { Sign::Plus } else { Sign::Minus };
                if fs != exact.sign {
                    sign_mismatch += 1;
                }
            }
        }
        pass &= worst <= 1e-6 && sign_mismatch == 0;
        parts.push(format!("{f} max rel err {worst:.1e}, sign mismatches {sign_mismatch}"));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let x = 10_000;
    let s = expand(&FormDescriptor::delta(), x).unwrap();
    let table = theta_table(&s);
    let mut worst_identity = 0.0f64;
    for m in 1..=8 {
        let stream = assemble_multiplicative(&table, m, x, StreamKind::Sym).unwrap().to_vec();
        for p in primes_up_to(x) {
            let exact = lambda_prime_power_exact(&s, p, m).unwrap().lambda_value;
            worst_identity = worst_identity.max((stream[p] - exact).abs() / exact.abs().max(1.0));
        }
    }
    let mut excess = 0usize;
    for m in 1..=4 {
        let d = divisor_bound_table(x, m);
        let v = assemble_multiplicative(&table, m, x, StreamKind::Sym).unwrap().to_vec();
        excess += (1..=x).filter(|&n| v[n].abs() > d[n] as f64 + 1e-6).count();
    }
    outcome(
        worst_identity <= 1e-9 && excess == 0,
        format!("sym^m(p) vs exact lambda(p^m), m<=8: max err {worst_identity:.1e}; divisor bound exceedances {excess}"),
    )
}

fn criterion_8() -> Outcome {
    let mut closed_err = 0.0f64;
    let mut simpson_err = 0.0f64;
    let mut sym_err = 0.0f64;
    for m in 1..=50 {
        let st = measure_of_positivity_set(m, AngleMeasure::SatoTate).unwrap();
        closed_err = closed_err.max((st - predicted_density(m, false).unwrap().positive).abs());
        let oracle: f64 = positivity_intervals(m)
            .iter()
            .map(|&(a, b)| simpson(sato_tate_density, a, b, 10_000))
            .sum();
        simpson_err = simpson_err.max((oracle - st).abs());
        if m % 2 == 1 {
            let neg: f64 = negativity_intervals(m)
                .iter()
                .map(|&(a, b)| interval_measure(a, b, AngleMeasure::SatoTate))
                .sum();
            sym_err = sym_err.max((neg - st).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let a = rng.random_range(0.0..PI);
        let b = rng.random_range(a..=PI);
        let closed = interval_measure(a, b, AngleMeasure::SatoTate);
        simpson_err = simpson_err.max((closed - simpson(sato_tate_density, a, b, 10_000)).abs());
    }
    outcome(
        closed_err <= 1e-10 && simpson_err <= 1e-8 && sym_err <= 1e-10,
        format!(
            "positivity measure vs closed form {closed_err:.1e}, Simpson vs closed form {simpson_err:.1e}, odd-m symmetry {sym_err:.1e}"
        ),
    )
}

fn partial_summation_values() -> Vec<f64> {
    let n = 100_000;
    let table = theta_table(series("delta")).truncated(n);
    let mut out = Vec::new();
    for m in 1..=3 {
        let stream = assemble_multiplicative(&table, m, n, StreamKind::Sym).unwrap();
        for beta in [0.5, 1.0, 1.5] {
            out.push(partial_summation_check(&stream, beta, n).unwrap().residual);
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let r = partial_summation_values();
    let worst = r.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-9,
        format!("max residual {worst:.1e} over beta in {{0.5, 1, 1.5}}, m in {{1, 2, 3}}, N=1e5"),
    )
}

fn dyadic_table() -> &'static ThetaTable {
    static T: OnceLock<ThetaTable> = OnceLock::new();
    T.get_or_init(|| theta_table(series("delta")))
}

/// `(m, σ, geometric mean, min ratio, max ratio)`
fn abscissa_values() -> Vec<(u32, f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for m in 1..=2 {
        let stream = assemble_multiplicative(dyadic_table(), m, X_DYADIC, StreamKind::Sym).unwrap();
        for sigma in [1.1, 0.9] {
            let blocks = abscissa_probe(&stream, sigma, 14..=19).unwrap();
            let ratios: Vec<f64> = blocks.iter().filter_map(|b| b.ratio).collect();
            out.push((
                m,
                sigma,
                geometric_mean_ratio(&blocks).unwrap(),
                ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratios.iter().copied().fold(0.0, f64::max),
            ));
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, sigma, g, lo, hi) in abscissa_values() {
        let target = 2f64.powf(1.0 - sigma);
        let mut good = (g / target - 1.0).abs() <= 0.10;
        if sigma > 1.0 {
            good &= lo >= 0.80 && hi <= 1.00;
        }
        pass &= good;
        parts.push(format!(
            "m={m} sigma={sigma} geo mean {g:.4} (target {target:.4}, block ratios {lo:.3}..{hi:.3})"
        ));
    }
    outcome(pass, parts.join(", "))
}

fn trend_values() -> Vec<(u32, StreamKind, f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for m in 1..=2 {
        for kind in [StreamKind::Sym, StreamKind::Power] {
            let stream = assemble_multiplicative(dyadic_table(), m, X, kind).unwrap();
            let r = partial_sums(&stream, &[100_000, X]).unwrap();
            let (c5, c6) = (r.checkpoints[0], r.checkpoints[1]);
            out.push((
                m,
                kind,
                c5.ratio,
                c6.ratio,
                c5.partial_sum / c5.x as f64,
                c6.partial_sum / c6.x as f64,
            ));
        }
    }
    out
}

fn criterion_11() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, kind, r5, r6, a5, a6) in trend_values() {
        let drift = (r6 / r5 - 1.0).abs();
        let good = drift < 0.15 && a6 < a5;
        pass &= good;
        parts.push(format!(
            "m={m} {kind}: R(1e5)={r5:.4} R(1e6)={r6:.4} drift {:.1}%, A/x {a5:.4} -> {a6:.4}",
            100.0 * drift
        ));
    }
    outcome(pass, parts.join(", "))
}

#[derive(Debug, PartialEq)]
struct Snapshot {
    signs: Vec<Vec<[f64; 3]>>,
    ks: [f64; 3],
    residuals: Vec<f64>,
    abscissa: Vec<(u32, f64, f64, f64, f64)>,
    trend: Vec<(u32, StreamKind, f64, f64, f64, f64)>,
    expansion: Vec<num_bigint::BigInt>,
}

fn snapshot() -> Snapshot {
    Snapshot {
        signs: vec![
            sign_density_values("delta", &[1, 2, 3, 4]),
            sign_density_values("lvl32", &[1, 2, 4]),
            sign_density_values("lvl27", &[1, 2, 4]),
        ],
        ks: ks_values(),
        residuals: partial_summation_values(),
        abscissa: abscissa_values(),
        trend: trend_values(),
        expansion: expand(&FormDescriptor::delta(), 100_000).unwrap().coefficients().to_vec(),
    }
}

fn criterion_12() -> Outcome {
    let runs: Vec<Snapshot> = [1usize, 4]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(snapshot)
        })
        .collect();
    let same = runs[0] == runs[1];
    outcome(
        same,
        format!(
            "criteria 3-5 and 9-11 plus a 1e5 expansion rerun on 1 and 4 threads: {}",
            if same { "identical" } else { "DIFFERENT" }
        ),
    )
}

fn main() {
    // warm the shared expansions in parallel before timing individual criteria
    ["delta", "lvl11", "lvl27", "lvl32"].par_iter().for_each(|f| {
        expanded(f);
    });
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        let t = Instant::now();
        let o = f();
        println!(
            "{} criterion {n:>2}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
