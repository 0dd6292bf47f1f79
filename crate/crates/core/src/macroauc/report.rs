//! Bound reports and the repeated split/CV/train/bound protocol.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::MultiLabelDataset;
use super::eval::{cv_select, macro_auc, CvScore};
use super::train::{all_tasks, LinearRanker, TrainConfig};
use crate::bounds::{
    bound_ours_macroauc, bound_prior_macroauc, rstar_experiment, spectrum_from_weights, BoundParams, CutGrid,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{split_seed, stream};

/// Note attached to every report on how the constants were instantiated.
pub const CONSTANTS_NOTE: &str =
    "mu = 1 (hinge), B = 1 so that (26B + 22)*25/16 = 75; r* = 2 min over integer cuts d <= min(D, K)*rate";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_ours: f64,
    pub bound_prior: f64,
    pub r_star: f64,
    pub d_star: usize,
    pub params: BoundParams,
    pub tau: TauSummary,
    pub excluded_labels: Vec<usize>,
    pub provenance: String,
}

/// Bounds for a ranker trained on `train`, with `M̄`, `M̃` taken as the
/// empirical maxima. Degenerate labels are left out of every sum.
pub fn report_bounds(train: &MultiLabelDataset, ranker: &LinearRanker, t: f64, rate: f64) -> Result<BoundReport> {
    if !ranker.trained {
        return Err(Error::State("ranker has not been trained".into()));
    }
    if ranker.weights.nrows() != train.n_labels() || ranker.weights.ncols() != train.n_features() {
        return Err(Error::Structural("ranker and dataset shapes differ".into()));
    }
    let (tasks, excluded) = all_tasks(train);
    if tasks.is_empty() {
        return Err(Error::UndefinedMetric("every label is degenerate".into()));
    }
    let tau: Vec<f64> = tasks.iter().map(|t| t.tau()).collect();
    let feature_norm = train.max_row_norm();
    let rows: Vec<usize> = tasks.iter().map(|t| t.label).collect();
    let weights = ranker.weights.select_rows(&rows);
    let weight_norm = weights.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let params = BoundParams::macro_auc(tau.clone(), train.n_samples() as f64, weight_norm, feature_norm, t)?;
    let grid = CutGrid::experiment(train.n_features(), tasks.len(), rate)?;
    let rstar = rstar_experiment(&spectrum_from_weights(&weights)?, &params, grid)?;
    let summary = TauSummary {
        min: tau.iter().cloned().fold(f64::INFINITY, f64::min),
        mean: tau.iter().sum::<f64>() / tau.len() as f64,
        max: tau.iter().cloned().fold(0.0, f64::max),
    };
    Ok(BoundReport {
        bound_ours: bound_ours_macroauc(rstar.value, &params)?,
        bound_prior: bound_prior_macroauc(&params)?,
        r_star: rstar.value,
        d_star: rstar.cuts[0],
        params,
        tau: summary,
        excluded_labels: excluded,
        provenance: CONSTANTS_NOTE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub repeats: usize,
    pub grid: Vec<f64>,
    pub folds: usize,
    pub lr: f64,
    pub epochs: usize,
    pub t: f64,
    pub rate: f64,
    /// Fraction of samples used for training; the rest is held out.
    pub train_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repeats: 5,
            grid: super::eval::LAMBDA_GRID.to_vec(),
            folds: 3,
            lr: 0.05,
            epochs: 300,
            t: 100f64.ln(),
            rate: 1.0,
            train_fraction: 2.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub weight_decay: f64,
    pub cv: Vec<CvScore>,
    /// `None` when every label is degenerate in the held-out part.
    pub test_macro_auc: Option<f64>,
    pub report: BoundReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; zero for a single value.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std =
            if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub bound_ours: MeanStd,
    pub bound_prior: MeanStd,
    pub r_star: MeanStd,
    pub ours_smaller: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub runs: Vec<RunResult>,
    pub summary: ExperimentSummary,
}

const SPLIT_STREAM: u64 = u64::MAX - 2;

/// Seeded train/test split; the first `⌊fraction·ñ⌋` shuffled samples train.
pub fn train_test_split(
    data: &MultiLabelDataset,
    fraction: f64,
    seed: u64,
) -> Result<(MultiLabelDataset, MultiLabelDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("train fraction must lie in (0, 1), got {fraction}")));
    }
    let mut perm: Vec<usize> = (0..data.n_samples()).collect();
    perm.shuffle(&mut stream(seed, SPLIT_STREAM));
    let cut = (fraction * data.n_samples() as f64).floor() as usize;
    Ok((data.subset(&perm[..cut]), data.subset(&perm[cut..])))
}

/// Repeat `repeats` times: split, cross-validate the weight decay, train on
/// the training part, and compute both bounds. Repeat `i` uses seed
/// `split_seed(seed, i)`.
pub fn run_experiment(data: &MultiLabelDataset, cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let mut runs = Vec::with_capacity(cfg.repeats);
    for i in 0..cfg.repeats {
        let seed = split_seed(cfg.seed, i as u64);
        let (train, test) = train_test_split(data, cfg.train_fraction, seed)?;
        let base = TrainConfig { lr: cfg.lr, epochs: cfg.epochs, weight_decay: 0.0, seed };
        let cv = cv_select(&train, &cfg.grid, cfg.folds, &base, exec)?;
        let report = report_bounds(&train, &cv.ranker, cfg.t, cfg.rate)?;
        let test_macro_auc = match macro_auc(&cv.ranker, &test) {
            Ok(a) => Some(a),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        runs.push(RunResult {
            seed,
            weight_decay: cv.weight_decay,
            cv: cv.scores,
            test_macro_auc,
            report,
            warnings: cv.warnings,
        });
    }
    let col = |f: fn(&BoundReport) -> f64| runs.iter().map(|r| f(&r.report)).collect::<Vec<_>>();
    let bound_ours = MeanStd::of(&col(|r| r.bound_ours));
    let bound_prior = MeanStd::of(&col(|r| r.bound_prior));
    let r_star = MeanStd::of(&col(|r| r.r_star));
    Ok(ExperimentReport {
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        n_labels: data.n_labels(),
        summary: ExperimentSummary {
            bound_ours,
            bound_prior,
            r_star,
            ours_smaller: bound_ours.mean < bound_prior.mean,
        },
        runs,
    })
}
