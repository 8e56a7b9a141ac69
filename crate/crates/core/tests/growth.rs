//! Growth of `Σ |λ(n)|` for delta up to 10^6.

use symsign::asymptotics::{delta_m, partial_sums};
use symsign::forms::{expand, FormDescriptor};
use symsign::hecke::theta_table;
use symsign::sympower::{assemble_multiplicative, StreamKind};

#[test]
fn partial_sums_slow_down_and_diverge() {
    let x = 1_000_000;
    let table = theta_table(&expand(&FormDescriptor::delta(), x).unwrap());
    let checkpoints = [10_000, 30_000, 100_000, 300_000, x];
    for m in 1..=4 {
        for kind in [StreamKind::Sym, StreamKind::Power] {
            let stream = assemble_multiplicative(&table, m, x, kind).unwrap();
            let r = partial_sums(&stream, &checkpoints).unwrap();
            assert_eq!(r.delta_m, delta_m(m).unwrap());
            let per_n: Vec<f64> = r.checkpoints.iter().map(|c| c.partial_sum / c.x as f64).collect();
            for w in per_n.windows(2) {
                assert!(w[1] < w[0], "m={m} {kind}: A(x)/x not decreasing: {per_n:?}");
            }
            let a = |x: usize| r.checkpoints.iter().find(|c| c.x == x).unwrap().partial_sum;
            assert!(a(x) >= 2.0 * a(300_000), "m={m} {kind}");
            assert!(r.checkpoints.iter().all(|c| c.ratio > 0.0));
            assert_eq!(r.constant_estimate, Some(r.checkpoints[4].ratio));
        }
    }
}
