use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use fracwr::dnwr::dnwr_iterate;
use fracwr::laplace::kernels::kernel_catalog;
use fracwr::laplace::talbot::{talbot_invert, LaplaceSymbol};
use fracwr::linalg::solve_tridiag;
use fracwr::solver1d::{solve_subdomain, SideBc, SubdomainGrid};
use fracwr::timegrid::{CaputoWeights, TimeMesh};
use fracwr::{
    DecompositionSpec, PiecewiseConstant, ProblemSpec, Quantity, Waveform, WaveformTag,
};

fn spec_unit() -> ProblemSpec {
    ProblemSpec {
        nu: 0.25,
        domain: (0.0, 2.0),
        kappa: PiecewiseConstant::constant(1.0),
        forcing: Arc::new(|x: f64, _| (std::f64::consts::PI * x / 2.0).sin()),
        dirichlet: Arc::new(|_, _| 0.0),
        u0: Arc::new(|_| 0.0),
        v0: Arc::new(|_| 0.0),
        t_end: 1.0,
    }
}

fn bench_tridiag(c: &mut Criterion) {
    let n = 400;
    let sub = vec![-1.0; n];
    let diag = vec![4.0; n];
    let sup = vec![-1.0; n];
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
    c.bench_function("tridiag_400", |b| {
        b.iter(|| solve_tridiag(&sub, &diag, &sup, &rhs))
    });
}

fn bench_subdomain_solve(c: &mut Criterion) {
    let spec = spec_unit();
    let mesh = Arc::new(TimeMesh::graded(1.0, 64, 3.0).unwrap());
    let weights = CaputoWeights::l1(&mesh, 0.5).unwrap();
    let grid = SubdomainGrid::new(0.0, 1.0, 100, 1.0).unwrap();
    c.bench_function("subdomain_solve_m64_n100", |b| {
        b.iter(|| {
            solve_subdomain(
                &grid,
                &spec,
                &mesh,
                &weights,
                SideBc::OuterDirichlet,
                SideBc::OuterDirichlet,
            )
            .unwrap()
        })
    });
}

fn bench_dnwr_sweep(c: &mut Criterion) {
    let spec = spec_unit();
    let decomp = DecompositionSpec::new(
        vec![0.0, 1.0, 2.0],
        vec![1.0, 1.0],
        vec![0.5],
        vec![0.01, 0.01],
    )
    .unwrap();
    let mesh = Arc::new(TimeMesh::graded(1.0, 64, 3.0).unwrap());
    let tag = WaveformTag { interface: 1, quantity: Quantity::Trace };
    c.bench_function("dnwr_4_iterations_m64_n200", |b| {
        b.iter(|| {
            let guess = Waveform::step_guess(mesh.clone(), 1.0, 0.0, tag);
            dnwr_iterate(&spec, &decomp, &mesh, vec![guess], 4, 1e-30).unwrap()
        })
    });
}

fn bench_talbot(c: &mut Criterion) {
    let f = LaplaceSymbol::new("exp(-sqrt s)", |s| (-s.sqrt()).exp());
    let times: Vec<f64> = (1..=32).map(|i| i as f64 / 32.0).collect();
    c.bench_function("talbot_invert_32pts", |b| {
        b.iter(|| talbot_invert(&f, &times).unwrap())
    });
}

fn bench_kernel_norm(c: &mut Criterion) {
    let k = kernel_catalog("P1", &[0.5, 1.0, 0.5], 0.4).unwrap();
    c.bench_function("kernel_l1_norm_p1_400panels", |b| {
        b.iter(|| k.l1_norm(1.0, 400).unwrap())
    });
}

criterion_group!(
    benches,
    bench_tridiag,
    bench_subdomain_solve,
    bench_dnwr_sweep,
    bench_talbot,
    bench_kernel_norm
);
criterion_main!(benches);
