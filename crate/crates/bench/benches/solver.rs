use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wavetrack::calibration::random_data;
use wavetrack::control::{synthesize, ControlProblem};
use wavetrack::engine::run;
use wavetrack::hypsys::sys_dld;
use wavetrack::riemann::{approx_riemann, h_riemann, SolverParams};
use wavetrack::{Mode, State};
use wavetrack_bench::random_run;

fn riemann(c: &mut Criterion) {
    let sys = sys_dld(0.01, 0.2);
    let params = SolverParams::new(&sys, 0.01, 0.01);
    let ul = State::from_vec(vec![0.01, -0.02]);
    let ur = State::from_vec(vec![-0.01, 0.03]);
    c.bench_function("approx_riemann", |b| b.iter(|| approx_riemann(&sys, &params, black_box(&ul), black_box(&ur)).unwrap()));
    c.bench_function("h_riemann", |b| b.iter(|| h_riemann(&sys, &params, black_box(&ul), black_box(&ur)).unwrap()));
}

fn runs(c: &mut Criterion) {
    let sys = sys_dld(0.01, 0.2);
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    for mode in [Mode::Splitting, Mode::ZeroWave] {
        for lv in [0.04, 0.02] {
            let spec = random_run(&sys, 3, mode, lv, lv, 1.0);
            group.bench_with_input(BenchmarkId::new(mode.label(), lv), &spec, |b, s| b.iter(|| run(&sys, s.clone()).unwrap()));
        }
    }
    group.finish();
}

fn control(c: &mut Criterion) {
    let sys = sys_dld(0.01, 0.2);
    let ubar = random_data(&sys, 11, 3, 0.05, 1.0).unwrap();
    let problem = ControlProblem { sys: sys.clone(), ubar, horizon: 2.5, params: SolverParams::new(&sys, 0.02, 0.02) };
    let mut group = c.benchmark_group("control");
    group.sample_size(10);
    group.bench_function("synthesize", |b| b.iter(|| synthesize(black_box(&problem)).unwrap()));
    group.finish();
}

criterion_group!(benches, riemann, runs, control);
criterion_main!(benches);
