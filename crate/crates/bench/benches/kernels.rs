use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudopath::{
    compute_kernel, convolve_kernels, fk_time_sliced, fresnel_quadrature_lhs, Atom, AtomicComplexMeasure, Complex64,
    EvolutionSpec, FiniteRankOperator, FresnelIntegrand, Grid1D, InitialDatum, PathFunctionalSpec, PotentialSpec,
    QuadratureMethod,
};

fn specs() -> Vec<(&'static str, EvolutionSpec, Grid1D)> {
    vec![
        (
            "heat",
            EvolutionSpec::new(2, Complex64::new(-0.5, 0.0)).unwrap(),
            Grid1D::new(-20.0, 20.0, 4096).unwrap(),
        ),
        (
            "airy",
            EvolutionSpec::new(3, Complex64::new(0.0, 1.0 / 3.0)).unwrap(),
            Grid1D::new(-8.0, 4.0, 1536).unwrap(),
        ),
        (
            "quartic",
            EvolutionSpec::new(4, Complex64::new(-1.0, 0.0)).unwrap(),
            Grid1D::new(-40.0, 40.0, 4096).unwrap(),
        ),
    ]
}

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute_kernel");
    for (name, spec, grid) in specs() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| compute_kernel(black_box(&spec), 1.0, &grid).unwrap())
        });
    }
    group.finish();
}

fn convolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolve_kernels");
    for (name, spec, grid) in specs() {
        let a = compute_kernel(&spec, 0.4, &grid).unwrap();
        let k = compute_kernel(&spec, 0.6, &grid).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| convolve_kernels(black_box(&a), &k).unwrap())
        });
    }
    group.finish();
}

fn time_sliced(c: &mut Criterion) {
    let half = 4.0 * std::f64::consts::PI;
    let grid = Grid1D::new(-half, half, 256).unwrap();
    let pf = PathFunctionalSpec::new(EvolutionSpec::new(4, Complex64::new(-1.0, 0.0)).unwrap(), 0.25).unwrap();
    let atoms = (-8..=8)
        .map(|j| {
            let y = j as f64 / 4.0;
            Atom::new(vec![y], Complex64::new((-0.5 * y * y).exp(), 0.0))
        })
        .collect();
    let u0 = InitialDatum::new(AtomicComplexMeasure::new(1, atoms).unwrap()).unwrap();
    let v = PotentialSpec::cosine(Complex64::new(0.2, 0.0), 0.5);
    let mut group = c.benchmark_group("fk_time_sliced");
    for n in [16, 128] {
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| fk_time_sliced(&pf, &u0, &v, black_box(n), &grid).unwrap())
        });
    }
    group.finish();
}

fn parseval(c: &mut Criterion) {
    let b = FiniteRankOperator::new(vec![0.3, -0.4], vec![vec![0.6, 0.8], vec![-0.8, 0.6]]).unwrap();
    let atoms = vec![
        Atom::new(vec![0.5, 1.0], Complex64::new(1.0, 0.0)),
        Atom::new(vec![-0.2, 0.3], Complex64::new(0.0, 0.5)),
    ];
    let f = FresnelIntegrand::new(AtomicComplexMeasure::new(2, atoms).unwrap(), 1.0).unwrap();
    let mut group = c.benchmark_group("fresnel_quadrature_lhs");
    group.sample_size(10);
    for (name, method) in [
        ("regularized", QuadratureMethod::Regularized),
        ("growing_box", QuadratureMethod::GrowingBox),
    ] {
        group.bench_function(BenchmarkId::from_parameter(name), |bch| {
            bch.iter(|| fresnel_quadrature_lhs(black_box(&b), &f, method).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernel, convolve, time_sliced, parseval);
criterion_main!(benches);
