use gdbound_core::macroauc::{
    cv_select, macro_auc, run_experiment, synthetic_dataset, ExperimentConfig, MultiLabelDataset, SyntheticConfig,
    TrainConfig,
};
use gdbound_core::Execution;

fn quick(seed: u64) -> ExperimentConfig {
    ExperimentConfig { seed, repeats: 2, ..Default::default() }
}

#[test]
fn few_labels_regime_favours_ours() {
    let data = synthetic_dataset(&SyntheticConfig::few_labels(1)).unwrap();
    let rep = run_experiment(&data, &quick(1), Execution::Parallel).unwrap();
    assert!(rep.summary.ours_smaller);
    assert!(rep.runs.iter().all(|r| r.test_macro_auc.unwrap() > 0.7));
}

#[test]
fn many_labels_regime_reverses() {
    let data = synthetic_dataset(&SyntheticConfig::many_labels(1)).unwrap();
    let rep = run_experiment(&data, &quick(1), Execution::Parallel).unwrap();
    assert!(!rep.summary.ours_smaller);
}

#[test]
fn cv_prefers_small_decay_on_separable_data() {
    let n = 60;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = i % 2 == 0;
        let s = if y { 0.3 } else { -0.3 };
        features.extend([s + ((i * 37) % 11) as f64 / 40.0, ((i * 53) % 17) as f64 / 17.0 - 0.5]);
        labels.push(y);
    }
    let data = MultiLabelDataset::new(2, 1, features, labels).unwrap();
    let base = TrainConfig { epochs: 50, seed: 2, ..Default::default() };
    let r = cv_select(&data, &[1e-4, 1e-1], 3, &base, Execution::Parallel).unwrap();
    assert_eq!(r.weight_decay, 1e-4);
    assert!(macro_auc(&r.ranker, &data).unwrap() > 0.9);
}
