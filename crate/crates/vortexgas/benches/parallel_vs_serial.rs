//! Data-parallel kernels against their sequential fallbacks.
//!
//! Run with `cargo bench -p vortexgas`. The parallel paths must produce
//! bit-identical results to the serial ones; these benches measure what
//! the parallelism buys at ensemble and force-loop granularity.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vortexgas::dynamics::{velocity_field, velocity_field_serial};
use vortexgas::experiments::member_rng;
use vortexgas::spectral::GreenEvaluator;
use vortexgas::vortex::{
    empirical_vorticity, hamiltonian_split, interaction_energy, sample_lambda, IntensityLaw,
    IntensityScale,
};

fn bench_velocity_field(c: &mut Criterion) {
    let green = GreenEvaluator::ewald();
    let mut group = c.benchmark_group("velocity_field");
    for &n in &[100usize, 400] {
        let mut rng = member_rng(7, 0);
        let config = sample_lambda(n, IntensityLaw::StandardGaussian, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", n), &config, |b, cfg| {
            b.iter(|| velocity_field(black_box(cfg), &green).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", n), &config, |b, cfg| {
            b.iter(|| velocity_field_serial(black_box(cfg), &green).unwrap())
        });
    }
    group.finish();
}

fn bench_ensemble_energies(c: &mut Criterion) {
    let mut group = c.benchmark_group("free_ensemble_energies");
    group.sample_size(10);
    let members = 200usize;
    let n = 200usize;
    let energy_of = |i: usize| {
        let mut rng = member_rng(11, i as u64);
        let cfg = sample_lambda(n, IntensityLaw::RademacherBalanced, &mut rng).unwrap();
        interaction_energy(&cfg, IntensityScale::InvSqrtN).unwrap()
    };
    group.bench_function("parallel", |b| {
        b.iter(|| vortexgas::exec::indexed_map(members, energy_of))
    });
    group.bench_function("serial", |b| {
        b.iter(|| vortexgas::exec::indexed_map_serial(members, energy_of))
    });
    group.finish();
}

fn bench_split_hamiltonian(c: &mut Criterion) {
    let ewald = vortexgas::spectral::EwaldGreen::new();
    let mut rng = member_rng(13, 0);
    let config = sample_lambda(400, IntensityLaw::StandardGaussian, &mut rng).unwrap();
    c.bench_function("hamiltonian_split_n400", |b| {
        b.iter(|| hamiltonian_split(black_box(&config), &ewald).unwrap())
    });
}

fn bench_vorticity_transform(c: &mut Criterion) {
    let mut rng = member_rng(17, 0);
    let config = sample_lambda(200, IntensityLaw::RademacherBalanced, &mut rng).unwrap();
    c.bench_function("empirical_vorticity_cut256", |b| {
        b.iter(|| empirical_vorticity(black_box(&config), 256).unwrap())
    });
}

criterion_group!(
    benches,
    bench_velocity_field,
    bench_ensemble_energies,
    bench_split_hamiltonian,
    bench_vorticity_transform
);
criterion_main!(benches);
