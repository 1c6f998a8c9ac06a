use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mps_bench::fixture;
use mps_core::fem::Discretization;
use mps_core::musielak::{multiphase_norm, SampledScalar};
use mps_core::solvers::{solve_problem1, SolveConfig};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy_and_gradient");
    for (id, n) in [("kirchhoff-multiphase-1d", 1024), ("kirchhoff-multiphase-2d", 32)] {
        let (spec, space) = fixture(id, n);
        let disc = Discretization::new(&space, spec.exponents(), spec.weights(), *spec.kirchhoff());
        let u = space.interpolate(|x| x.iter().map(|t| t * (1.0 - t)).product());
        g.bench_with_input(BenchmarkId::from_parameter(id), &u, |b, u| b.iter(|| disc.energy_and_gradient(u).unwrap()));
    }
    g.finish();
}

fn luxemburg(c: &mut Criterion) {
    let (spec, space) = fixture("variable-exponent-1d", 1024);
    let grid = space.grid();
    let u = SampledScalar::new(grid.points().iter().map(|x| (7.0 * x[0]).sin() * 3.0).collect()).unwrap();
    c.bench_function("multiphase_norm", |b| {
        b.iter(|| multiphase_norm(&u, spec.exponents(), spec.weights(), grid, 1e-12).unwrap())
    });
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_problem1");
    g.sample_size(10);
    for (id, n) in [("linear-1d", 256), ("kirchhoff-multiphase-1d", 256), ("kirchhoff-multiphase-2d", 16)] {
        let (spec, space) = fixture(id, n);
        g.bench_function(id, |b| b.iter(|| solve_problem1(&spec, &space, &SolveConfig::default()).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, assembly, luxemburg, solve);
criterion_main!(benches);
