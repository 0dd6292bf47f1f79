//! Sequential vs rayon execution of the three data-parallel loops.
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gdbound_core::lfrc::{estimate_lfrc, LfrcTask, LinearClassSpec};
use gdbound_core::macroauc::{all_tasks, synthetic_dataset, train_sgd, SyntheticConfig, TrainConfig};
use gdbound_core::mcverify::{sample_z, BaseDist, DependentSampler, PairKernel, Structure};
use gdbound_core::Execution;
use nalgebra::DMatrix;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let sampler = DependentSampler {
        structure: Structure::BipartiteRanking { n_pos: 6, n_neg: 5 },
        base: BaseDist::Uniform,
        kernel: PairKernel::Product,
        tasks: 3,
        seed: 1,
    };
    let mut group = c.benchmark_group("sample_z");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, 20_000), |b| b.iter(|| sample_z(&sampler, 20_000, exec).unwrap()));
    }
    group.finish();
}

fn rademacher(c: &mut Criterion) {
    let data = synthetic_dataset(&SyntheticConfig::few_labels(3)).unwrap();
    let (tasks, _) = all_tasks(&data);
    let rows = |idx: &[usize]| {
        DMatrix::from_row_iterator(idx.len(), data.n_features(), idx.iter().flat_map(|&i| data.row(i).iter().copied()))
    };
    let tasks: Vec<LfrcTask> = tasks
        .iter()
        .map(|t| LfrcTask::Pairs { positives: rows(&t.positives), negatives: rows(&t.negatives) })
        .collect();
    let spec = LinearClassSpec::from_tasks(&tasks, 1.0, Some(0.01)).unwrap();
    let mut group = c.benchmark_group("estimate_lfrc");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, 200), |b| {
            b.iter(|| estimate_lfrc(&tasks, &spec, 200, 5, exec).unwrap())
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let data = synthetic_dataset(&SyntheticConfig::many_labels(2)).unwrap();
    let cfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
    let mut group = c.benchmark_group("train_sgd");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, data.n_labels()), |b| {
            b.iter(|| train_sgd(&data, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, rademacher, training);
criterion_main!(benches);
