use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use loopresp_bench::{detuned, detuning_scan, extremal_scan, integrable, resonant};
use loopresp_core::analytic::{general_coherences, resonant_coherences};
use loopresp_core::floquet::{extract_coefficients, solve_harmonics};
use loopresp_core::scan::{extremal_detuning, Config};
use loopresp_core::{build_generator, integrate, run_scan, DensityVector, Mode, Output};

fn coefficients(c: &mut Criterion) {
    let mut g = c.benchmark_group("coefficients");
    for (name, (s, d)) in [("resonant", resonant()), ("detuned", detuned())] {
        g.bench_function(BenchmarkId::new("extract", name), |b| {
            b.iter(|| extract_coefficients(black_box(&s), black_box(&d), Mode::ClosedLoop).unwrap())
        });
    }
    let (s, d) = detuned();
    g.bench_function("generator", |b| {
        b.iter(|| build_generator(black_box(&s), black_box(&d), Mode::ClosedLoop).unwrap())
    });
    let gen = build_generator(&s, &d, Mode::ClosedLoop).unwrap();
    g.bench_function("harmonic_balance", |b| {
        b.iter(|| solve_harmonics(black_box(&gen), gen.omega21, gen.omega12()).unwrap())
    });
    g.bench_function("closed_form_general", |b| {
        b.iter(|| general_coherences(black_box(&s), black_box(&d)).unwrap())
    });
    let (s, d) = resonant();
    g.bench_function("closed_form_resonant", |b| {
        b.iter(|| resonant_coherences(black_box(&s), black_box(&d)).unwrap())
    });
    g.finish();
}

fn scans(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan");
    g.sample_size(20);
    let spec = detuning_scan(401);
    for threads in [1, 4] {
        g.bench_function(BenchmarkId::new("detuning_401", threads), |b| {
            b.iter(|| run_scan(black_box(&spec), threads).unwrap())
        });
    }
    let config = Config::default();
    g.bench_function("extremal_search", |b| {
        b.iter(|| extremal_detuning(black_box(&config), Output::D21).unwrap())
    });
    let spec = extremal_scan(21);
    g.bench_function("extremal_21", |b| b.iter(|| run_scan(black_box(&spec), 4).unwrap()));
    g.finish();
}

fn time_domain(c: &mut Criterion) {
    let mut g = c.benchmark_group("time_domain");
    g.sample_size(10);
    let (s, d) = integrable();
    let gen = build_generator(&s, &d, Mode::ClosedLoop).unwrap();
    g.bench_function("integrate_400", |b| {
        b.iter(|| integrate(black_box(&gen), &DensityVector::ground_state(), 400.0, 1e-10).unwrap())
    });
    g.finish();
}

criterion_group!(benches, coefficients, scans, time_domain);
criterion_main!(benches);
