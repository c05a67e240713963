use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ftexp::expfit::{evaluate_grid, evaluate_grid_sequential};
use ftexp::fixtures::FixtureSet;
use ftexp::geometry::{fermat_points, fermat_points_sequential, Point2, Triangle};
use ftexp::series::{self, smooth, smooth_sequential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [1_000, 10_000, 100_000];

fn triangles(n: usize) -> Vec<Triangle> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut p = || Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
    (0..n).map(|_| Triangle { v: [p(), p(), p()] }).collect()
}

fn random_walk(n: usize) -> series::TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut y = 0.0;
    let samples = (0..n)
        .map(|k| {
            y += rng.gen_range(-1.0..1.0);
            (k as f64, y)
        })
        .collect();
    series::validate(samples).unwrap()
}

fn bench_fermat(c: &mut Criterion) {
    let mut group = c.benchmark_group("fermat_points");
    for n in SIZES {
        let ts = triangles(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("parallel", n), &ts, |b, ts| {
            b.iter(|| fermat_points(black_box(ts)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &ts, |b, ts| {
            b.iter(|| fermat_points_sequential(black_box(ts)))
        });
    }
    group.finish();
}

fn bench_smooth(c: &mut Criterion) {
    let mut group = c.benchmark_group("smooth");
    for n in SIZES {
        let s = random_walk(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("parallel", n), &s, |b, s| {
            b.iter(|| smooth(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &s, |b, s| {
            b.iter(|| smooth_sequential(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bench_grid(c: &mut Criterion) {
    let model = FixtureSet::bundled().unwrap().eq2_model;
    let mut group = c.benchmark_group("evaluate_grid");
    for n in SIZES {
        let step = 10.0 / (n - 1) as f64;
        group.throughput(Throughput::Elements(n as u64));
        group.bench_function(BenchmarkId::new("parallel", n), |b| {
            b.iter(|| evaluate_grid(black_box(&model), 1.0, 11.0, step).unwrap())
        });
        group.bench_function(BenchmarkId::new("sequential", n), |b| {
            b.iter(|| evaluate_grid_sequential(black_box(&model), 1.0, 11.0, step).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fermat, bench_smooth, bench_grid);
criterion_main!(benches);
