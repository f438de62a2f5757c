use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use planarz_bench::{grids, random_skew, spiderwebs};
use planarz_core::bp::{BpConfig, Schedule, run_bp};
use planarz_core::pfaffian::pfaffian;
use planarz_core::series::{pfaffian_series, z_empty};
use std::hint::black_box;

fn bp(c: &mut Criterion) {
    let mut group = c.benchmark_group("bp");
    for f in grids(&[5, 7, 10]) {
        for schedule in Schedule::CASCADE {
            let cfg = BpConfig {
                schedule,
                ..BpConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(schedule.name(), &f.name), &f.graph, |b, g| {
                b.iter(|| run_bp(black_box(g), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn two_regular(c: &mut Criterion) {
    let mut group = c.benchmark_group("z_empty");
    let mut fixtures = grids(&[5, 7, 10]);
    fixtures.extend(spiderwebs(9, &[5, 10, 20]));
    for f in &fixtures {
        group.bench_function(&f.name, |b| b.iter(|| z_empty(black_box(&f.graph), &f.bp).unwrap()));
    }
    group.finish();
}

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian_series");
    group.sample_size(10);
    for f in grids(&[4, 5]) {
        group.bench_function(&f.name, |b| {
            b.iter(|| pfaffian_series(black_box(&f.graph), &f.bp, 2, usize::MAX).unwrap())
        });
    }
    group.finish();
}

fn pf(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian");
    for n in [20, 60, 200] {
        let m = random_skew(n, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| pfaffian(black_box(m))));
    }
    group.finish();
}

criterion_group!(benches, bp, two_regular, series, pf);
criterion_main!(benches);
