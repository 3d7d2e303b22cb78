use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rkhs_scale::dsl::{parse_basis, parse_scaling};
use rkhs_scale::kernel::translate_profile;
use rkhs_scale::{KernelSource, ScaledKernelSpec, TruncationPolicy};

fn spec(basis: &str, scaling: &str) -> ScaledKernelSpec {
    ScaledKernelSpec::new(parse_basis(basis).unwrap(), parse_scaling(scaling).unwrap()).unwrap()
}

fn eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval");
    for (basis, scaling) in [
        ("ibb:s=4", "hyp:1"),
        ("ibb:s=4", "logpow:2"),
        ("gauss:ell=0.8", "hyp:2"),
        ("gauss:ell=0.8", "geo:1.1"),
        ("power:exp", "hyp:1"),
    ] {
        let k = spec(basis, scaling);
        g.bench_with_input(BenchmarkId::new(basis, scaling), &k, |b, k| {
            b.iter(|| k.eval(black_box(0.37), black_box(0.61)).unwrap())
        });
    }
    g.finish();
}

fn figure_one(c: &mut Criterion) {
    let basis = parse_basis("ibb:s=4").unwrap();
    let k = ScaledKernelSpec::with_truncation(basis, parse_scaling("logpow:2").unwrap(), TruncationPolicy::fixed(5000))
        .unwrap();
    let source = KernelSource::Series(k);
    let grid: Vec<f64> = (0..=200).map(|i| f64::from(i) / 200.0).collect();
    c.bench_function("translates fig1 column", |b| {
        b.iter(|| translate_profile(&source, 0.3, black_box(&grid), true, true).unwrap())
    });
}

criterion_group!(benches, eval, figure_one);
criterion_main!(benches);
