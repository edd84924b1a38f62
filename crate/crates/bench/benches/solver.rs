use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diracfp::{
    assemble, decompose, run, slobodeckij_norm, ModelSpec, OperatorScaling, SchemeConfig, C64,
};
use diracfp_bench::{antiperiodic, mode};
use std::hint::black_box;

fn assemble_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_decompose");
    group.sample_size(10);
    for n in [64usize, 128, 256] {
        let spec = ModelSpec::antiperiodic(1.0, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| decompose(&assemble(black_box(spec)).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn scheme_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("scheme_run");
    for n in [128usize, 256] {
        let s = antiperiodic(n);
        let mut cfg = SchemeConfig::new(C64::new(0.005, 0.0), 4.0, mode(&s, 0.1));
        cfg.scaling = OperatorScaling::Auto;
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| run(&s, black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn slobodeckij(c: &mut Criterion) {
    let mut group = c.benchmark_group("slobodeckij_half");
    for n in [128usize, 512] {
        let s = antiperiodic(n);
        let f = mode(&s, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| slobodeckij_norm(black_box(f), 0.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assemble_decompose, scheme_run, slobodeckij);
criterion_main!(benches);
