use altbit_core::checker::{check_consistent_prefix, Explorer};
use altbit_core::faults::canonical;
use altbit_core::protocols::{ab_init, AbConfig};
use altbit_core::statespace::reachable;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_explore(c: &mut Criterion) {
    let mut g = c.benchmark_group("explore");
    for n in [12usize, 16] {
        g.bench_function(format!("n{n}_seq"), |b| {
            b.iter(|| Explorer::default().explore(black_box(n), check_consistent_prefix))
        });
        g.bench_function(format!("n{n}_par4"), |b| {
            let ex = Explorer::default().with_workers(4);
            b.iter(|| ex.explore(black_box(n), check_consistent_prefix))
        });
    }
    g.finish();
}

fn bench_run(c: &mut Criterion) {
    let init = ab_init(&AbConfig::default()).unwrap();
    let errors = canonical().to_interleaved();
    c.bench_function("canonical_run", |b| {
        b.iter(|| altbit_core::run_trace(black_box(&init), black_box(&errors)))
    });
    c.bench_function("reachable_10", |b| b.iter(|| reachable(black_box(10))));
}

criterion_group!(benches, bench_explore, bench_run);
criterion_main!(benches);
