use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fop_bench::{convergent_problems, Problem};
use fop_core::fixtures::MomentFixture;
use fop_core::recurrences::DEFAULT_BREAKDOWN_EPS;
use fop_core::verify::{verify_relations, VerifyConfig};
use fop_core::{
    a13_coefficients, b13_coefficients, bootstrap, compute_moments, fit_relation, oracle_p, solve, step, FitNorm,
    RelationForm, ScalarProducts, SolverConfig, Vector,
};

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let config = SolverConfig::default();
    for p in convergent_problems() {
        let x0 = Vector::zeros(p.n());
        group.bench_with_input(BenchmarkId::from_parameter(&p.name), &p, |bench, p| {
            bench.iter(|| solve(&p.a, &p.b, &x0, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let p = Problem::from_generator("randsdd:200,3");
    let config = SolverConfig::default();
    let start = bootstrap(&p.a, &p.b, &Vector::zeros(p.n()), &p.b, &config).unwrap();
    c.bench_function("step/randsdd:200", |bench| {
        bench.iter_batched(
            || start.clone(),
            |mut state| step(&mut state, &p.a, config.breakdown_eps).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_moments(c: &mut Criterion) {
    let fx = MomentFixture::rotation_blocks(12, 0, 20).unwrap();
    c.bench_function("moments/rotblocks:12/20", |bench| {
        bench.iter(|| compute_moments(black_box(&fx.a), &fx.r0, &fx.y, 20).unwrap())
    });
    let mut group = c.benchmark_group("oracle_p");
    for k in [4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |bench, &k| {
            bench.iter(|| oracle_p(black_box(&fx.moments), k).unwrap())
        });
    }
    group.finish();
    c.bench_function("coefficients/a13+b13/k=7", |bench| {
        bench.iter(|| {
            let sp = ScalarProducts::from_moments(&fx.moments, 7).unwrap();
            (
                a13_coefficients(&sp, DEFAULT_BREAKDOWN_EPS).unwrap(),
                b13_coefficients(&sp, DEFAULT_BREAKDOWN_EPS).unwrap(),
            )
        })
    });
}

fn bench_fit(c: &mut Criterion) {
    let fx = MomentFixture::random_sdd(10, 0, 16).unwrap();
    let form = RelationForm::a11();
    c.bench_function("fit/coefficients/A11", |bench| bench.iter(|| fit_relation(&form, &fx.moments, 6).unwrap()));
    c.bench_function("fit/krylov/A11", |bench| {
        bench.iter(|| {
            fop_core::fit_relation_in(&form, &fx.moments, 6, FitNorm::Krylov { a: &fx.a, r0: &fx.r0 }).unwrap()
        })
    });
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("default", |bench| bench.iter(|| verify_relations(&VerifyConfig::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_solve, bench_step, bench_moments, bench_fit);
criterion_main!(benches);
