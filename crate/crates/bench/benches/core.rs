use criterion::{black_box, criterion_group, criterion_main, Criterion};
use quasidark_bench::{experimental, small_space, storage_ramp};
use quasidark_core::dynamics::{storage_sweep, Model, SweepConfig};
use quasidark_core::hamiltonian::{bosonization_check, build_generator, build_rotating_frame, commutator_residual};
use quasidark_core::params::{effective_constants, ResonanceSolver};
use quasidark_core::protocol::{figure_leakage, omega_grid};
use quasidark_core::spectral::verify_eigensystem;
use quasidark_core::BasisLabel;

fn params(c: &mut Criterion) {
    let p = experimental();
    let solver = ResonanceSolver::default();
    c.bench_function("resonance_solve", |b| b.iter(|| solver.solve(black_box(&p), black_box(30.0)).unwrap()));
    let wg = solver.solve(&p, 30.0).unwrap();
    let tuned = p.with_omega_g(wg);
    c.bench_function("effective_constants", |b| {
        b.iter(|| effective_constants(black_box(&tuned), black_box(30.0)).unwrap())
    });
    let grid = omega_grid(30.0, 300).unwrap();
    c.bench_function("figure_leakage_301", |b| b.iter(|| figure_leakage(&p, black_box(&grid)).unwrap()));
}

fn operators(c: &mut Criterion) {
    let p = experimental();
    let spec = quasidark_core::SpaceSpec::new(3, 3, 3).unwrap();
    c.bench_function("frohlich_residual_333", |b| {
        b.iter(|| {
            let (h0, hi) = build_rotating_frame(&p, &spec, 15.0).unwrap();
            let s = build_generator(&p, &spec, 15.0).unwrap();
            commutator_residual(&h0, &hi, &s, &spec).unwrap()
        })
    });
    let (_, eff) = quasidark_core::params::resonant_constants(&p, 15.0).unwrap();
    c.bench_function("verify_eigensystem", |b| b.iter(|| verify_eigensystem(&eff, &spec).unwrap()));
    let mut group = c.benchmark_group("bosonization");
    group.sample_size(10);
    group.bench_function("n4", |b| b.iter(|| bosonization_check(&p, 4, 2, 15.0).unwrap()));
    group.finish();
}

fn dynamics(c: &mut Criterion) {
    let spec = small_space();
    let psi = spec.basis_state(BasisLabel { qubit: 1, ..BasisLabel::VACUUM }).unwrap();
    let schedule = storage_ramp(20.0);
    let cfg = SweepConfig::default();
    let mut group = c.benchmark_group("storage_sweep_20us");
    group.sample_size(10);
    group.bench_function("effective", |b| {
        b.iter(|| storage_sweep(&schedule, &spec, &psi, Model::Effective, &cfg).unwrap())
    });
    group.bench_function("full", |b| b.iter(|| storage_sweep(&schedule, &spec, &psi, Model::Full, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, params, operators, dynamics);
criterion_main!(benches);
