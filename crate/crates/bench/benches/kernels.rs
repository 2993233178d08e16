use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gplab_bench::{gaussian_field, symmetric_kernel};
use gplab_core::collision::{apply_b, apply_b_momentum};
use gplab_core::functionals::kernel_hs_norm;
use gplab_core::nls::SplitStepper;
use gplab_core::{Field, Power, Sign};
use std::hint::black_box;

fn fft(c: &mut Criterion) {
    let f = gaussian_field(3, 64, 6.0);
    let coeffs = f.to_momentum();
    let mut group = c.benchmark_group("fft_64_cubed");
    group.sample_size(20);
    group.bench_function("forward", |b| b.iter(|| black_box(&f).to_momentum()));
    group.bench_function("inverse", |b| b.iter(|| Field::from_momentum(*f.grid(), black_box(&coeffs)).unwrap()));
    group.finish();
}

fn nls_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("nls_step");
    group.sample_size(20);
    for (dim, m) in [(1, 8192), (3, 64)] {
        let f = gaussian_field(dim, m, 8.0);
        for power in [Power::Cubic, Power::Quintic] {
            let stepper = SplitStepper::new(f.grid(), Sign::Focusing, power, 1e-3);
            group.bench_function(BenchmarkId::new(format!("{power}"), format!("{dim}d_{m}")), |b| {
                let mut g = f.clone();
                b.iter(|| stepper.step(&mut g))
            });
        }
    }
    group.finish();
}

fn collision(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_b");
    group.sample_size(10);
    for (order, m) in [(2, 16), (2, 32), (3, 8)] {
        let g = symmetric_kernel(order, m);
        group.bench_function(BenchmarkId::new("direct", format!("k{order}_m{m}")), |b| {
            b.iter(|| apply_b(black_box(&g)).unwrap())
        });
    }
    let g = symmetric_kernel(2, 16);
    group.bench_function("momentum_k2_m16", |b| b.iter(|| apply_b_momentum(black_box(&g)).unwrap()));
    group.finish();
}

fn hs_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_hs_norm");
    for (order, m) in [(1, 256), (2, 32), (3, 12)] {
        let g = symmetric_kernel(order, m);
        group.bench_function(format!("k{order}_m{m}"), |b| b.iter(|| kernel_hs_norm(black_box(&g), 1.0)));
    }
    group.finish();
}

criterion_group!(benches, fft, nls_step, collision, hs_norm);
criterion_main!(benches);
