use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fmiom::assign::solve_problem3;
use fmiom::data::SplitMix64;
use fmiom::separation::separate_pair;
use fmiom::{cluster, fit_with_spec, friedman_generate, l1_fit, llsr_fit, Config, TransformSpec};
use std::hint::black_box;

fn design(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = SplitMix64::new(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
            r.push(1.0);
            r
        })
        .collect();
    let y = x.iter().map(|r| r.iter().sum::<f64>() + rng.normal()).collect();
    (x, y)
}

fn regression(c: &mut Criterion) {
    let mut g = c.benchmark_group("regression");
    for n in [50, 250] {
        let (x, y) = design(n, 10, 1);
        g.bench_with_input(BenchmarkId::new("l1_fit", n), &n, |b, _| b.iter(|| l1_fit(black_box(&x), &y).unwrap()));
        g.bench_with_input(BenchmarkId::new("llsr_fit", n), &n, |b, _| b.iter(|| llsr_fit(black_box(&x), &y).unwrap()));
    }
    g.finish();
}

fn separation(c: &mut Criterion) {
    let (a, _) = design(60, 3, 2);
    let b_pts: Vec<Vec<f64>> = design(60, 3, 3).0.into_iter().map(|r| r.iter().map(|v| v + 0.5).collect()).collect();
    c.bench_function("separate_pair/60x60", |b| b.iter(|| separate_pair(black_box(&a), &b_pts).unwrap()));
}

fn assignment(c: &mut Criterion) {
    let ds = friedman_generate(1, 250, 1.0, 0).unwrap();
    let spec = TransformSpec::identity(ds.d());
    let data = spec.design_dataset(&ds).unwrap();
    let clustering = cluster(data.x(), data.y(), 10).unwrap();
    let mut g = c.benchmark_group("assignment");
    g.sample_size(10);
    for k in [1, 2, 3] {
        let cfg = Config { k, ..Config::default() };
        g.bench_with_input(BenchmarkId::new("friedman1_n250", k), &k, |b, _| {
            b.iter(|| solve_problem3(black_box(&data), &clustering, &cfg).unwrap())
        });
    }
    g.finish();

    c.bench_function("fit/friedman1_n250_k2", |b| {
        b.iter(|| fit_with_spec(black_box(&ds), spec.clone(), &Config::default()).unwrap())
    });
}

criterion_group!(benches, regression, separation, assignment);
criterion_main!(benches);
