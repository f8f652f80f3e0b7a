use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qforce_bench::{reference_solution, reference_target, sweep_radii};
use qforce_core::force::reference;
use qforce_core::{
    assemble_dyadic, build_direction_grid, cross_sections, log_derivative, mie_coefficients,
    riccati_xi, total_force, trace_cross_sections, Complex64, MieSolution, ThermalState,
    TruncationPolicy, Vec3,
};

fn special(c: &mut Criterion) {
    let mx = reference::EPSILON.sqrt() * 40.5;
    c.bench_function("log_derivative N=200 |z|=141", |b| {
        b.iter(|| log_derivative(200, black_box(mx)).unwrap())
    });
    c.bench_function("riccati_xi N=200 x=40.5", |b| {
        b.iter(|| riccati_xi(200, black_box(40.5)).unwrap())
    });
}

fn mie(c: &mut Criterion) {
    let target = reference_target();
    let omega = reference::omega0();
    c.bench_function("mie_coefficients reference N=200", |b| {
        b.iter(|| mie_coefficients(black_box(&target), omega, reference::N_TRUNC).unwrap())
    });
    let sol = reference_solution();
    c.bench_function("cross_sections N=200", |b| {
        b.iter(|| cross_sections(black_box(&sol)))
    });
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep_radii");
    g.sample_size(20);
    for count in [100usize, 400] {
        let radii = sweep_radii(count);
        g.bench_with_input(BenchmarkId::from_parameter(count), &radii, |b, radii| {
            b.iter(|| {
                qforce_core::sweep_radii(
                    &reference::material(),
                    radii,
                    reference::omega0(),
                    TruncationPolicy::Auto,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn dyadic(c: &mut Criterion) {
    let mut g = c.benchmark_group("dyadic");
    for x in [1.0, 5.0, 20.0] {
        let n = qforce_core::truncation_order(x, TruncationPolicy::Auto).unwrap();
        let sol = MieSolution::for_size_parameter(Complex64::new(12.11, 0.1), x, n).unwrap();
        let (m, k) = (
            Vec3::new(0.3, 0.4, (0.75f64).sqrt()),
            Vec3::new(-0.6, 0.0, 0.8),
        );
        g.bench_with_input(BenchmarkId::new("assemble", x), &sol, |b, sol| {
            b.iter(|| assemble_dyadic(sol, black_box(&m), black_box(&k), n).unwrap())
        });
    }
    let sol = MieSolution::for_size_parameter(Complex64::new(12.11, 0.1), 2.0, 7).unwrap();
    let grid = build_direction_grid(16, 32).unwrap();
    g.sample_size(10);
    g.bench_function("trace_cross_sections x=2", |b| {
        b.iter(|| trace_cross_sections(&sol, &grid, &Vec3::z()).unwrap())
    });
    g.finish();
}

fn force(c: &mut Criterion) {
    let mut g = c.benchmark_group("force");
    g.sample_size(10);
    let target = reference_target();
    let (squeeze, grids) = (reference::squeezing(), reference::grids());
    let thermal = ThermalState::new(300.0).unwrap();
    g.bench_function("total_force reference", |b| {
        b.iter(|| total_force(&target, &squeeze, &thermal, &grids).unwrap())
    });
    g.finish();
}

criterion_group!(benches, special, mie, sweep, dyadic, force);
criterion_main!(benches);
