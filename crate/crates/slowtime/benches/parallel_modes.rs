//! Sequential against data-parallel execution for the hot paths that accept
//! an execution mode. Results are bitwise identical between modes; only the
//! wall clock differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use slowtime::exec::ExecMode;
use slowtime::pcaf::{build_b_fast_with_mode, objective_siso_with_mode, BSide};
use slowtime::types::{random_unimodular_code, DesignConfig};

fn modes() -> Vec<(&'static str, ExecMode)> {
    let mut m = vec![("sequential", ExecMode::Sequential)];
    #[cfg(feature = "parallel")]
    m.push(("parallel", ExecMode::Parallel));
    m
}

fn bench_build(c: &mut Criterion) {
    let n = 128;
    let cfg = DesignConfig {
        n_len: n,
        p_max: 100,
        n_f: 2 * n,
        ..DesignConfig::default_for(n)
    };
    let code = random_unimodular_code(n, 1).unwrap();
    let mut group = c.benchmark_group("build_b_fast");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| build_b_fast_with_mode(&code, BSide::ActsOnX, &cfg, mode).unwrap())
        });
    }
    group.finish();
}

fn bench_objective(c: &mut Criterion) {
    let n = 256;
    let cfg = DesignConfig {
        n_len: n,
        p_max: 200,
        n_f: 2 * n,
        ..DesignConfig::default_for(n)
    };
    let x = random_unimodular_code(n, 1).unwrap();
    let y = random_unimodular_code(n, 2).unwrap();
    let mut group = c.benchmark_group("objective");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| objective_siso_with_mode(&x, &y, &cfg, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_build, bench_objective);
criterion_main!(benches);
