use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hawkes_lob::compound::CompoundModel;
use hawkes_lob::empirical::verify_fclt;
use hawkes_lob::hawkes::{simulate, HawkesSpec};
use hawkes_lob::markov::{MarkTable, TransitionMatrix};
use hawkes_lob::mle::{fit_mle, FitConfig};
use hawkes_lob::par::Exec;

fn model() -> CompoundModel {
    CompoundModel::new(
        HawkesSpec::exponential(1.0, 1.0, 2.0).unwrap(),
        TransitionMatrix::two_state(0.5, 0.5).unwrap(),
        MarkTable::new(vec![-0.005, 0.005]).unwrap(),
    )
    .unwrap()
}

fn fclt_ensemble(c: &mut Criterion) {
    let m = model();
    let mut g = c.benchmark_group("verify_fclt");
    g.sample_size(10);
    for (name, exec) in [("auto", Exec::Auto), ("sequential", Exec::Sequential)] {
        g.bench_with_input(BenchmarkId::new(name, 200), &exec, |b, &exec| {
            b.iter(|| verify_fclt(&m, 1e3, 1.0, 200, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn swarm_fit(c: &mut Criterion) {
    let events = simulate(&HawkesSpec::exponential(1.0, 2.0, 4.0).unwrap(), 2000.0, 3).unwrap();
    let mut g = c.benchmark_group("fit_mle");
    g.sample_size(10);
    for (name, exec) in [("auto", Exec::Auto), ("sequential", Exec::Sequential)] {
        let cfg = FitConfig {
            exec,
            budget: 4000,
            ..Default::default()
        };
        g.bench_function(name, |b| b.iter(|| fit_mle(&events, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, fclt_ensemble, swarm_fit);
criterion_main!(benches);
