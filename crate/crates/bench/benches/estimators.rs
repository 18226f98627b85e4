use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdcov::estimators::BatchEvaluator;
use pdcov::specfun::{gen_bessel_scaled, j0};
use pdcov::{EstimatorSpec, FittedEstimator, KernelFamily};
use pdcov_bench::{pseudo, wave_data};
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    c.bench_function("j0", |b| b.iter(|| j0(black_box(7.3))));
    let mut g = c.benchmark_group("gen_bessel_scaled");
    for a in [1.0, 50.0, 1000.0] {
        g.bench_with_input(BenchmarkId::from_parameter(a), &a, |b, &a| b.iter(|| gen_bessel_scaled(black_box(a), 12.0)));
    }
    g.finish();
}

fn closed_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval_radial");
    for family in KernelFamily::ALL {
        for (label, spec) in [
            ("isotropic", EstimatorSpec::isotropic(family, 0.3).unwrap()),
            ("monotone", EstimatorSpec::monotone(family, 0.3).unwrap()),
        ] {
            let fit = FittedEstimator::new(spec, pseudo(10), 1.0).unwrap();
            g.bench_function(format!("{label}/{}", family.name()), |b| b.iter(|| fit.eval_radial(black_box(4.2)).unwrap()));
        }
    }
    g.finish();
}

fn batch(c: &mut Criterion) {
    let data = wave_data(4000, 1);
    let values: Vec<f64> = pseudo(10).values().to_vec();
    let mut out = vec![0.0; data.len()];
    let spec = EstimatorSpec::isotropic(KernelFamily::Gaussian, 0.16).unwrap();
    let mut g = c.benchmark_group("batch_isotropic_4000");
    let grid = BatchEvaluator::new(&spec, &data).unwrap();
    g.bench_function("grid", |b| b.iter(|| grid.evaluate(black_box(&values), &mut out)));
    let exact = BatchEvaluator::new(&spec, &data).unwrap().exact();
    g.bench_function("exact", |b| b.iter(|| exact.evaluate(black_box(&values), &mut out)));
    g.finish();
}

criterion_group!(benches, special_functions, closed_forms, batch);
criterion_main!(benches);
