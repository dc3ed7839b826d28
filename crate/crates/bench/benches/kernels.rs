use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lielab_core::alcove::{self, Classifier};
use lielab_core::analysis::{self, Arc};
use lielab_core::arith::{self, IntegralQuadraticForm};
use lielab_core::charkit;
use lielab_core::specverify;
use lielab_core::RootSystem;

fn characters(c: &mut Criterion) {
    let mut g = c.benchmark_group("character");
    for label in ["A2", "B2", "G2", "F4"] {
        let rs = RootSystem::build(label).unwrap();
        let mut r = lielab_core::rng::stream(&[1]);
        let pts: Vec<_> = (0..64).map(|_| alcove::uniform_point(&rs, &mut r)).collect();
        let mu = vec![3i64; rs.rank];
        g.bench_function(BenchmarkId::new("quotient", label), |b| {
            b.iter(|| pts.iter().map(|p| charkit::character(&rs, &mu, p, None).unwrap().value.re).sum::<f64>())
        });
    }
    let a2 = RootSystem::build("A2").unwrap();
    let p = alcove::uniform_point(&a2, &mut lielab_core::rng::stream(&[2]));
    g.bench_function("freudenthal/A2", |b| b.iter(|| charkit::freudenthal_character_oracle(&a2, black_box(&[12, 7]), &p).unwrap()));
    g.finish();
}

fn classification(c: &mut Criterion) {
    let rs = RootSystem::build("B2").unwrap();
    let cl = Classifier::new(&rs, 64).unwrap();
    let mut r = lielab_core::rng::stream(&[3]);
    let pts: Vec<_> = (0..1024).map(|_| alcove::uniform_point(&rs, &mut r)).collect();
    c.bench_function("classify/B2/1024", |b| b.iter(|| pts.iter().map(|p| cl.classify_raw(&p.t).1).sum::<u64>()));
}

fn kernel_norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel-fft");
    g.sample_size(10);
    let a1 = RootSystem::build("A1").unwrap();
    let a2 = RootSystem::build("A2").unwrap();
    for n in [64u32, 256] {
        g.bench_function(BenchmarkId::new("A1-p4", n), |b| b.iter(|| analysis::kernel_norm_fft(&a1, n, &Arc::rational(0, 1), 4.0).unwrap()));
    }
    g.bench_function(BenchmarkId::new("A2-p4", 32), |b| b.iter(|| analysis::kernel_norm_fft(&a2, 32, &Arc::rational(0, 1), 4.0).unwrap()));
    g.finish();
}

fn exact_checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact");
    g.sample_size(10);
    g.bench_function("subsystem/rank<=8", |b| b.iter(|| specverify::verify_subsystem_all(8).unwrap()));
    let f = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
    g.bench_function("gauss/A2/q=97", |b| b.iter(|| arith::gauss_sum(&f, 5, &[1, 2], black_box(97)).unwrap()));
    g.finish();
}

criterion_group!(benches, characters, classification, kernel_norms, exact_checks);
criterion_main!(benches);
