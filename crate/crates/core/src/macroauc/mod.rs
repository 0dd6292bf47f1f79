//! Macro-AUC pipeline: multi-label ingestion, pair transform, SGD training of
//! a pairwise-hinge linear ranker, cross-validation and bound reports.

mod dataset;
mod eval;
mod report;
mod synthetic;
mod train;

pub use dataset::{format_mlsvm, load_dataset, parse_mlsvm, MultiLabelDataset};
pub use eval::{auc, cv_select, macro_auc, CvResult, CvScore, LAMBDA_GRID};
pub use report::{
    report_bounds, run_experiment, train_test_split, BoundReport, ExperimentConfig, ExperimentReport,
    ExperimentSummary, MeanStd, RunResult, TauSummary, CONSTANTS_NOTE,
};
pub use synthetic::{synthetic_dataset, SyntheticConfig};
pub use train::{all_tasks, pair_transform, sgd_step, train_sgd, LinearRanker, MacroAucTask, TrainConfig};
