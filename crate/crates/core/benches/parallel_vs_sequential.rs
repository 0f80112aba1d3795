use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use stq_lru::exec::Execution;
use stq_lru::lattice::{build_lattice, run_repetitions, LatticeParams, LruMode};
use stq_lru::lru::LruKind;
use stq_lru::search::{optimize, SearchOptions};
use stq_lru::templates::template;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn search_restarts(c: &mut Criterion) {
    let t = template("sinl-3").unwrap();
    let mut group = c.benchmark_group("search_restarts");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = SearchOptions { restarts: 16, execution, ..Default::default() };
        group.bench_with_input(BenchmarkId::new(name, 16), &opts, |b, opts| {
            b.iter(|| optimize(black_box(&t), LruKind::Sinl, opts).unwrap())
        });
    }
    group.finish();
}

fn lattice_repetitions(c: &mut Criterion) {
    let cfg = build_lattice(LatticeParams { rounds: 1000, ..LatticeParams::new(5, 1e-3, LruMode::Sil) }).unwrap();
    let mut group = c.benchmark_group("lattice_repetitions");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 8), &execution, |b, &execution| {
            b.iter(|| run_repetitions(black_box(&cfg), 8, execution))
        });
    }
    group.finish();
}

criterion_group!(benches, search_restarts, lattice_repetitions);
criterion_main!(benches);
