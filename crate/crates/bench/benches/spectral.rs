use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lpcascade::constructions::{euler_u0, EulerInitParams, NseDatum, NseInitParams};
use lpcascade::evolution::{Solver, SolverConfig};
use lpcascade::spectral::{advect, trilinear};

fn sparse(c: &mut Criterion) {
    let u0 = euler_u0(&EulerInitParams::new(1.0, 10).unwrap());
    c.bench_function("advect euler Q=10", |b| b.iter(|| advect(black_box(&u0), black_box(&u0)).unwrap()));
    let d = NseDatum::new(NseInitParams::new(0.2, 0.51, vec![2, 5]).unwrap()).unwrap();
    let u = d.field().unwrap();
    let u1 = d.high_part(1).unwrap();
    c.bench_function("trilinear nse (2,5) <U,U,U_q1>", |b| b.iter(|| trilinear(black_box(&u), black_box(&u), black_box(&u1)).unwrap()));
}

fn dense(c: &mut Criterion) {
    let u0 = euler_u0(&EulerInitParams::new(1.0, 5).unwrap());
    let s = Solver::new(SolverConfig::euler(256, 1e-4, 1e-3), 2).unwrap();
    let st = s.state_from_field(&u0).unwrap();
    c.bench_function("rhs 2D N=256", |b| b.iter(|| s.rhs(black_box(&st))));
    c.bench_function("rk4 step 2D N=256", |b| b.iter(|| s.step_rk4(black_box(&st), 1e-4)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sparse, dense
}
criterion_main!(benches);
