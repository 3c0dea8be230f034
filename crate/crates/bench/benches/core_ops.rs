use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use svetnet_core::bell::{canonical_strategy, classical_bound_bruteforce, Variant};
use svetnet_core::coalition::{best_subvalue, Grouping};
use svetnet_core::fidelity::{min_eig_over_grid, AngleGrid, FidelityLine, StopiProblem};
use svetnet_core::netprotocol::{run_protocol, ProtocolConfig};
use svetnet_core::random::random_qubit_strategy;
use svetnet_core::selftest::run_selftest;

fn svetlichny_value(c: &mut Criterion) {
    let mut g = c.benchmark_group("svetlichny_value");
    for n in [3, 5] {
        let s = canonical_strategy(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| s.svetlichny_value(Variant::Plus).unwrap())
        });
    }
    g.finish();
}

fn classical_enumeration(c: &mut Criterion) {
    c.bench_function("classical_bound_bruteforce/5", |b| {
        b.iter(|| classical_bound_bruteforce(5, Variant::Plus).unwrap())
    });
}

fn coalition_subvalue(c: &mut Criterion) {
    let s = random_qubit_strategy(5, &mut ChaCha8Rng::seed_from_u64(1));
    let g = Grouping::coalition(5, &[2, 3, 4]).unwrap();
    c.bench_function("best_subvalue/5", |b| {
        b.iter(|| best_subvalue(&s, &g).unwrap())
    });
}

fn selftest(c: &mut Criterion) {
    let s = canonical_strategy(4).unwrap();
    c.bench_function("run_selftest/4", |b| b.iter(|| run_selftest(&s).unwrap()));
}

fn stopi_scan(c: &mut Criterion) {
    let line = FidelityLine::analytic(3).unwrap();
    let problem = StopiProblem::new(3).unwrap();
    let grid = AngleGrid::default();
    c.bench_function("min_eig_over_grid/3", |b| {
        b.iter(|| min_eig_over_grid(&problem, line.f, line.mu, &grid))
    });
}

fn protocol(c: &mut Criterion) {
    let cfg = ProtocolConfig::new(canonical_strategy(3).unwrap(), "canonical").sampled(100_000, 0);
    c.bench_function("run_protocol/3/1e5", |b| {
        b.iter(|| run_protocol(&cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = svetlichny_value, classical_enumeration, coalition_subvalue, selftest, stopi_scan, protocol
}
criterion_main!(benches);
