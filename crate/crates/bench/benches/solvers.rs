use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qls_core::analysis::{classify_state, phase_diagram, Thresholds};
use qls_core::effective::{build_l_operator, greens_function_direct, solve_l, solve_transformed_equation};
use qls_core::{single_particle_spectrum, two_excitation_spectrum, ArrayConfig, Chi};

fn spectra(c: &mut Criterion) {
    let single = ArrayConfig::new(51, 0.05, Chi::Finite(1.0)).unwrap();
    c.bench_function("single_particle_n51", |b| b.iter(|| single_particle_spectrum(black_box(&single)).unwrap()));

    for n in [15, 25] {
        let cfg = ArrayConfig::new(n, 0.5, Chi::Finite(1.0)).unwrap();
        c.bench_function(&format!("two_excitation_n{n}"), |b| {
            b.iter(|| two_excitation_spectrum(black_box(&cfg)).unwrap())
        });
    }

    let cfg = ArrayConfig::new(25, 0.5, Chi::Finite(1.0)).unwrap();
    let states = two_excitation_spectrum(&cfg).unwrap();
    c.bench_function("classify_all_n25", |b| {
        b.iter(|| {
            states
                .iter()
                .map(|s| classify_state(s, Thresholds::default()).unwrap())
                .filter(|c| c.is_cross)
                .count()
        })
    });
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("phase_diagram");
    group.sample_size(10);
    let phis = [0.05, 0.5, 2.0];
    let chis = [Chi::Finite(0.0), Chi::Finite(1.0), Chi::Infinite];
    group.bench_function("n12_3x3", |b| {
        b.iter(|| phase_diagram(12, &phis, &chis, Thresholds::default(), 1).unwrap())
    });
    group.finish();
}

fn effective(c: &mut Criterion) {
    let mut group = c.benchmark_group("effective");
    group.sample_size(10);
    group.bench_function("green_direct_n31", |b| {
        b.iter(|| greens_function_direct(31, black_box(-190.0), (20, 10)).unwrap())
    });
    group.bench_function("transformed_n31", |b| b.iter(|| solve_transformed_equation(31, black_box(0.05)).unwrap()));
    group.bench_function("l_operator_n31", |b| {
        b.iter(|| solve_l(&build_l_operator(31, black_box(0.1), 3).unwrap()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, spectra, sweep, effective);
criterion_main!(benches);
