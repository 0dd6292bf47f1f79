//! Pair transform and SGD training of the pairwise-hinge linear ranker.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graphdep::{bipartite_ranking_graph, DependencyGraph, FractionalCover};
use crate::rng::stream;

/// One label seen as a bipartite ranking task over (positive, negative) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroAucTask {
    pub label: usize,
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

impl MacroAucTask {
    pub fn n_pos(&self) -> usize {
        self.positives.len()
    }

    pub fn n_neg(&self) -> usize {
        self.negatives.len()
    }

    /// `min(n⁺, n⁻) / ñ`.
    pub fn tau(&self) -> f64 {
        self.n_pos().min(self.n_neg()) as f64 / (self.n_pos() + self.n_neg()) as f64
    }

    /// `n⁺·n⁻`.
    pub fn m(&self) -> usize {
        self.n_pos() * self.n_neg()
    }

    /// `max(n⁺, n⁻)`.
    pub fn chi(&self) -> usize {
        self.n_pos().max(self.n_neg())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.positives.iter().flat_map(move |&p| self.negatives.iter().map(move |&q| (p, q)))
    }

    pub fn dependency_graph(&self) -> Result<(DependencyGraph, FractionalCover)> {
        bipartite_ranking_graph(self.n_pos(), self.n_neg())
    }
}

pub fn pair_transform(data: &MultiLabelDataset, k: usize) -> Result<MacroAucTask> {
    if k >= data.n_labels() {
        return Err(Error::Domain(format!("label {k} not below {}", data.n_labels())));
    }
    let (positives, negatives): (Vec<usize>, Vec<usize>) = (0..data.n_samples()).partition(|&i| data.is_positive(i, k));
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::DegenerateLabel(k));
    }
    Ok(MacroAucTask { label: k, positives, negatives })
}

/// Tasks for every non-degenerate label, plus the excluded label ids.
pub fn all_tasks(data: &MultiLabelDataset) -> (Vec<MacroAucTask>, Vec<usize>) {
    let mut tasks = Vec::new();
    let mut excluded = Vec::new();
    for k in 0..data.n_labels() {
        match pair_transform(data, k) {
            Ok(t) => tasks.push(t),
            Err(_) => excluded.push(k),
        }
    }
    (tasks, excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr: 0.05, epochs: 300, weight_decay: 0.0, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::Config(format!("weight decay must be nonnegative, got {}", self.weight_decay)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRanker {
    /// `K×D`, row `k` scores label `k`.
    pub weights: DMatrix<f64>,
    pub config: TrainConfig,
    pub trained: bool,
    /// Labels with no positives or no negatives in the training data; their rows stay zero.
    pub excluded: Vec<usize>,
}

impl LinearRanker {
    pub fn untrained(n_labels: usize, n_features: usize, config: TrainConfig) -> Self {
        Self { weights: DMatrix::zeros(n_labels, n_features), config, trained: false, excluded: Vec::new() }
    }

    pub fn score(&self, k: usize, x: &[f64]) -> f64 {
        self.weights.row(k).iter().zip(x).map(|(w, x)| w * x).sum()
    }

    /// `max_k ‖w_k‖₂`.
    pub fn max_row_norm(&self) -> f64 {
        self.weights.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

/// One step `w ← w − lr·(∂hinge + 2λw)` on the pair difference `x⁺ − x⁻`.
pub fn sgd_step(w: &mut [f64], diff: &[f64], lr: f64, weight_decay: f64) {
    let margin: f64 = w.iter().zip(diff).map(|(a, b)| a * b).sum();
    let active = margin < 1.0;
    for (wj, dj) in w.iter_mut().zip(diff) {
        let g = if active { -dj } else { 0.0 };
        *wj -= lr * (g + 2.0 * weight_decay * *wj);
    }
}

/// Per label, each epoch draws `ñ` uniform (positive, negative) pairs from
/// RNG stream `k` of the seed. Labels train independently.
pub fn train_sgd(data: &MultiLabelDataset, config: &TrainConfig, exec: Execution) -> Result<LinearRanker> {
    config.validate()?;
    if data.n_samples() == 0 {
        return Err(Error::Precondition("cannot train on an empty dataset".into()));
    }
    let (d, n) = (data.n_features(), data.n_samples());
    let rows = exec.map(data.n_labels(), |k| {
        let task = pair_transform(data, k).ok()?;
        let mut rng = stream(config.seed, k as u64);
        let mut w = vec![0.0; d];
        let mut diff = vec![0.0; d];
        for _ in 0..config.epochs {
            for _ in 0..n {
                let p = task.positives[rng.gen_range(0..task.n_pos())];
                let q = task.negatives[rng.gen_range(0..task.n_neg())];
                for ((o, a), b) in diff.iter_mut().zip(data.row(p)).zip(data.row(q)) {
                    *o = a - b;
                }
                sgd_step(&mut w, &diff, config.lr, config.weight_decay);
            }
        }
        Some(w)
    });
    let mut ranker = LinearRanker::untrained(data.n_labels(), d, *config);
    for (k, row) in rows.into_iter().enumerate() {
        match row {
            Some(w) => ranker.weights.row_mut(k).copy_from_slice(&w),
            None => ranker.excluded.push(k),
        }
    }
    ranker.trained = true;
    Ok(ranker)
}
