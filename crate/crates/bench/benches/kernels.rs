use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use strichartz_core::ons::{flat_band_field, strichartz_ratio};
use strichartz_core::schatten::{singular_values, CMatrix};
use strichartz_core::{
    dispersive_sup, forward_transform, inverse_transform, propagate, Complex64, Field, GeometrySpec, TimeGrid,
};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transforms");
    for spec in [
        GeometrySpec::torus(vec![1024]),
        GeometrySpec::waveguide(1, 1, vec![64, 64], 8.0),
    ] {
        let g = spec.build().unwrap();
        let f = Field::from_fn(g.clone(), |x| Complex64::new((3.0 * x[0]).sin(), x[1].cos())).unwrap();
        let label = format!("{:?}", g.sizes());
        group.bench_with_input(BenchmarkId::new("round_trip", &label), &f, |b, f| {
            b.iter(|| inverse_transform(&forward_transform(black_box(f))))
        });
        group.bench_with_input(BenchmarkId::new("propagate", &label), &f, |b, f| {
            b.iter(|| propagate(black_box(f), 0.37, 2.5).unwrap())
        });
    }
    group.finish();
}

fn kernel_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("dispersive_sup");
    group.sample_size(10);
    for n in [16, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| dispersive_sup(n, 3.0, 128, 128, 1e-6).unwrap())
        });
    }
    group.finish();
}

fn strichartz(c: &mut Criterion) {
    let g = GeometrySpec::torus(vec![256]).build().unwrap();
    let f = flat_band_field(&g, 16).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 1025).unwrap();
    c.bench_function("strichartz_ratio/N=16", |b| {
        b.iter(|| strichartz_ratio(black_box(&f), 2.0, 16, grid, 8.0, 8.0).unwrap())
    });
}

fn svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("singular_values");
    for n in [32, 128] {
        let a = CMatrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 13) as f64;
            Complex64::new(x.sin(), (0.5 * x).cos())
        });
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| singular_values(black_box(a)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, kernel_sweep, strichartz, svd);
criterion_main!(benches);
