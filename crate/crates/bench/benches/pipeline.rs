use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use destack_bench::{group_inputs, pipeline_inputs};
use destack_core::destackify::{destackify_all, Config};
use destack_core::grouprep::{abelianize_iterated, examples, poly_dim, Block};
use destack_core::invariants::all_invariants;

fn invariants(c: &mut Criterion) {
    let mut g = c.benchmark_group("invariants");
    for (name, fan) in pipeline_inputs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &fan, |b, f| b.iter(|| all_invariants(black_box(f)).unwrap()));
    }
    g.finish();
}

fn destackify(c: &mut Criterion) {
    let mut g = c.benchmark_group("destackify");
    g.sample_size(20);
    for (name, fan) in pipeline_inputs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &fan, |b, f| {
            b.iter(|| destackify_all(black_box(f), Config::default()).unwrap())
        });
    }
    g.finish();
}

fn abelianize(c: &mut Criterion) {
    let mut g = c.benchmark_group("abelianize");
    for (name, grp) in group_inputs() {
        let chi = grp.character(&Block::all(grp.degree())).unwrap();
        let h = grp.whole();
        g.bench_function(name, |b| b.iter(|| abelianize_iterated(black_box(&h), &chi, 8).unwrap()));
    }
    g.finish();
}

fn polydim(c: &mut Criterion) {
    let grp = examples::cyclic_diagonal(12, &[5, 7, 1]);
    let (v, w) = (Block { start: 0, len: 2 }, Block { start: 2, len: 1 });
    c.bench_function("polydim mu12 d=8", |b| b.iter(|| poly_dim(black_box(&grp), &v, &w, 8).unwrap()));
}

criterion_group!(benches, invariants, destackify, abelianize, polydim);
criterion_main!(benches);
