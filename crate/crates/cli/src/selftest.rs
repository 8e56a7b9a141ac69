use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symsign::asymptotics::partial_summation_check;
use symsign::forms::cache::{read_series, write_series};
use symsign::forms::checks::{
    cm_vanishing_violations, coprime_pairs, deligne_violations, hecke_p2_violations, multiplicativity_violations,
};
use symsign::forms::{expand, FormDescriptor};
use symsign::hecke::{lambda_prime_power_chebyshev, lambda_prime_power_exact, theta_table};
use symsign::primes::primes_up_to;
use symsign::stats::{
    ks_statistic, measure_of_positivity_set, predicted_density, AngleMeasure, Reference,
};
use symsign::sympower::{assemble_multiplicative, divisor_bound_table, StreamKind};
use symsign::Result;

struct Tally {
    failed: usize,
}

impl Tally {
    fn record(&mut self, name: &str, ok: bool, detail: impl std::fmt::Display) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

/// Runs the invariant suite at precision `x`; `Ok(true)` if every check passes.
pub fn run(x: usize, seed: u64) -> Result<bool> {
    let mut t = Tally { failed: 0 };
    for form in FormDescriptor::builtins() {
        let name = form.name().to_string();
        let s = expand(&form, x)?;
        t.record(&format!("{name} a(1)"), s.a(1)? == &1.into(), s.a(1)?);

        let bad = multiplicativity_violations(&s, &coprime_pairs(x, 1000, seed));
        t.record(&format!("{name} multiplicativity"), bad.is_empty(), format!("{} violations", bad.len()));
        let bad = hecke_p2_violations(&s);
        t.record(&format!("{name} p^2 Hecke relation"), bad.is_empty(), format!("{} violations", bad.len()));
        let bad = deligne_violations(&s, x);
        t.record(&format!("{name} Deligne bound"), bad.is_empty(), format!("{} violations", bad.len()));

        let vanishing = match name.as_str() {
            "lvl32" => Some((4, 3)),
            "lvl27" => Some((3, 2)),
            _ => None,
        };
        if let Some((q, r)) = vanishing {
            let bad = cm_vanishing_violations(&s, q, r);
            t.record(&format!("{name} a(p) = 0 for p ≡ {r} mod {q}"), bad.is_empty(), format!("{} violations", bad.len()));
        }

        let table = theta_table(&s);
        let mut worst = 0.0f64;
        for entry in table.entries().iter().take(300) {
            for m in 1..=10 {
                let exact = lambda_prime_power_exact(&s, entry.p, m)?.lambda_value;
                let float = lambda_prime_power_chebyshev(entry.theta, m)?;
                worst = worst.max((float - exact).abs() / exact.abs().max(1.0));
            }
        }
        t.record(&format!("{name} Chebyshev vs Hecke recursion"), worst <= 1e-6, format!("max rel err {worst:.1e}"));

        let mut bytes = Vec::new();
        write_series(&s, &mut bytes)?;
        let back = read_series(&form, &bytes[..])?;
        t.record(&format!("{name} cache round trip"), back == s, format!("{} bytes", bytes.len()));
    }

    let delta = expand(&FormDescriptor::delta(), x)?;
    let table = theta_table(&delta);
    let mut identity = 0.0f64;
    let mut excess = 0;
    let mut residual = 0.0f64;
    for m in 1..=4 {
        let stream = assemble_multiplicative(&table, m, x, StreamKind::Sym)?;
        let v = stream.to_vec();
        for p in primes_up_to(x) {
            let exact = lambda_prime_power_exact(&delta, p, m)?.lambda_value;
            identity = identity.max((v[p] - exact).abs() / exact.abs().max(1.0));
        }
        let d = divisor_bound_table(x, m);
        excess += (1..=x).filter(|&n| v[n].abs() > d[n] as f64 + 1e-6).count();
        for beta in [0.5, 1.0, 1.5] {
            residual = residual.max(partial_summation_check(&stream, beta, x)?.residual);
        }
    }
    t.record("delta sym^m(p) = lambda(p^m)", identity <= 1e-9, format!("max err {identity:.1e}"));
    t.record("delta divisor bound", excess == 0, format!("{excess} exceedances"));
    t.record("delta partial summation", residual <= 1e-9, format!("max residual {residual:.1e}"));

    let mut measure = 0.0f64;
    for m in 1..=50 {
        let st = measure_of_positivity_set(m, AngleMeasure::SatoTate)?;
        measure = measure.max((st - predicted_density(m, false)?.positive).abs());
    }
    t.record("positivity measure vs closed form", measure <= 1e-10, format!("max err {measure:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in [Reference::SatoTate, Reference::DeuringMixture] {
        let sample = r.sample(100_000, &mut rng);
        let d = ks_statistic(&sample, r)?;
        t.record(&format!("synthetic KS {r:?}"), d <= 0.01, format!("{d:.5}"));
    }

    println!("selftest: {} failures", t.failed);
    Ok(t.failed == 0)
}
