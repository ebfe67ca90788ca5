//! Serial against rayon-parallel execution of the word sweep, the profile
//! table build and a full pressure evaluation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lyapspec::cocycle::OneStepCocycle;
use lyapspec::matalg::SquareMatrix;
use lyapspec::pressure::PressureEvaluator;
use lyapspec::sweep::{sweep, Execution, ProfileTable, DEFAULT_BUDGET};

fn cocycle() -> OneStepCocycle {
    OneStepCocycle::full_shift(vec![
        SquareMatrix::from_rows(&[[2.0, 0.3, 0.0], [0.1, 1.0, 0.2], [0.0, 0.4, 0.5]]).unwrap(),
        SquareMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 2.0, 0.1], [0.2, 0.0, 0.7]]).unwrap(),
    ])
    .unwrap()
}

const MODES: [(&str, Execution); 2] = [("serial", Execution::Serial), ("parallel", Execution::Parallel)];

fn bench_sweep(cr: &mut Criterion) {
    let c = cocycle();
    let mut g = cr.benchmark_group("sweep_top_exponent");
    for n in [12, 16] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| {
                    sweep(&c, n, exec, DEFAULT_BUDGET, || f64::NEG_INFINITY, |m, _w, lsv| *m = m.max(lsv[0]), f64::max)
                        .unwrap()
                })
            });
        }
    }
    g.finish();
}

fn bench_table(cr: &mut Criterion) {
    let c = cocycle();
    let mut g = cr.benchmark_group("profile_table");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| ProfileTable::build(&c, 14, exec, DEFAULT_BUDGET).unwrap().len()));
    }
    g.finish();
}

fn bench_pressure(cr: &mut Criterion) {
    let c = cocycle();
    let mut g = cr.benchmark_group("pressure_with_hessian");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                // a fresh evaluator so no cached table is reused
                let mut ev = PressureEvaluator::new(&c, exec);
                ev.value_gradient_hessian(black_box(&[1.0, 0.5, -0.5]), 14).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_sweep, bench_table, bench_pressure
}
criterion_main!(benches);
