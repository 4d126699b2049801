use actcert_core::checker::CheckConfig;
use actcert_core::gallery;
use actcert_core::lggscan::{scan, LggFunction, ScanConfig};
use actcert_core::model::{Real, StateId};
use actcert_core::sim::{exact_reachability, simulate, SimConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn checker(c: &mut Criterion) {
    let b = gallery::build("symmetric-walk").unwrap();
    c.bench_function("check symmetric-walk H=1000 exact", |bench| {
        let cfg = CheckConfig::exact(Real::int(1000), 100_000);
        bench.iter(|| b.run_with(black_box(&cfg)).unwrap())
    });
}

fn lgg(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan-lgg");
    g.sample_size(10);
    for n in [100, 300] {
        g.bench_function(format!("loglog N={n}"), |bench| {
            bench.iter(|| scan(black_box(&ScanConfig::new(n, LggFunction::LogLog))).unwrap())
        });
    }
    g.finish();
}

fn sim(c: &mut Criterion) {
    let b = gallery::build("symmetric-walk").unwrap();
    let v = b.variant.unwrap();
    let from = StateId::scalar(1);
    let mut g = c.benchmark_group("sim");
    g.sample_size(10);
    g.bench_function("simulate 10^4 trials H=100", |bench| {
        bench.iter(|| simulate(&b.system, &v, &SimConfig::new(10_000, Real::int(100), 7), &from).unwrap())
    });
    g.bench_function("exact oracle H=100", |bench| {
        bench.iter(|| exact_reachability(&b.system, &v, &Real::int(100), &from, 10_000).unwrap())
    });
    g.finish();
}

criterion_group!(benches, checker, lgg, sim);
criterion_main!(benches);
