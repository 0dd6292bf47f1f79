//! AUC, Macro-AUC and cross-validated selection of the weight decay.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::MultiLabelDataset;
use super::train::{train_sgd, LinearRanker, TrainConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::stream;

/// Fraction of (positive, negative) pairs ordered correctly, ties counting
/// one half. `None` when either class is empty.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of midranks of the positives (Mann–Whitney).
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&o| positive[o]).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Mean per-label AUC over labels with both classes present.
pub fn macro_auc(ranker: &LinearRanker, data: &MultiLabelDataset) -> Result<f64> {
    if ranker.weights.nrows() != data.n_labels() || ranker.weights.ncols() != data.n_features() {
        return Err(Error::Structural("ranker and dataset shapes differ".into()));
    }
    let mut total = 0.0;
    let mut used = 0;
    for k in 0..data.n_labels() {
        let scores: Vec<f64> = (0..data.n_samples()).map(|i| ranker.score(k, data.row(i))).collect();
        let positive: Vec<bool> = (0..data.n_samples()).map(|i| data.is_positive(i, k)).collect();
        if let Some(a) = auc(&scores, &positive) {
            total += a;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::UndefinedMetric("every label is degenerate".into()));
    }
    Ok(total / used as f64)
}

pub const LAMBDA_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// RNG stream (of the CV seed) used to shuffle samples into folds.
const FOLD_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub weight_decay: f64,
    /// `None` when every fold was skipped.
    pub mean_auc: Option<f64>,
    pub folds_used: usize,
}

#[derive(Debug, Clone)]
pub struct CvResult {
    pub weight_decay: f64,
    pub ranker: LinearRanker,
    pub scores: Vec<CvScore>,
    pub warnings: Vec<String>,
}

/// Seeded `folds`-fold CV over `grid`; the first grid value wins ties.
/// Retrains on all of `data` with the selected value.
pub fn cv_select(
    data: &MultiLabelDataset,
    grid: &[f64],
    folds: usize,
    base: &TrainConfig,
    exec: Execution,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::Config("weight-decay grid is empty".into()));
    }
    if folds < 2 || data.n_samples() < folds {
        return Err(Error::Precondition(format!(
            "need 2 ≤ folds ≤ ñ, got {folds} folds for {} samples",
            data.n_samples()
        )));
    }
    let mut perm: Vec<usize> = (0..data.n_samples()).collect();
    perm.shuffle(&mut stream(base.seed, FOLD_STREAM));
    let split: Vec<(MultiLabelDataset, MultiLabelDataset)> = (0..folds)
        .map(|f| {
            let (val, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
                perm.iter().copied().enumerate().partition(|(pos, _)| pos % folds == f);
            let pick = |v: Vec<(usize, usize)>| v.into_iter().map(|(_, i)| i).collect::<Vec<_>>();
            (data.subset(&pick(train)), data.subset(&pick(val)))
        })
        .collect();

    let jobs = grid.len() * folds;
    let outcomes = exec.try_map(jobs, |j| {
        let (g, f) = (j / folds, j % folds);
        let cfg = TrainConfig { weight_decay: grid[g], ..*base };
        let (train, val) = &split[f];
        let ranker = train_sgd(train, &cfg, exec)?;
        if ranker.excluded.len() == data.n_labels() {
            return Ok(Err(format!("fold {f}: every label is degenerate in the training part; skipped")));
        }
        match macro_auc(&ranker, val) {
            Ok(a) => Ok(Ok(a)),
            Err(Error::UndefinedMetric(_)) => {
                Ok(Err(format!("fold {f}: every label is degenerate in the validation part; skipped")))
            }
            Err(e) => Err(e),
        }
    })?;

    let mut warnings = Vec::new();
    let mut scores = Vec::new();
    for (g, &lambda) in grid.iter().enumerate() {
        let mut sum = 0.0;
        let mut used = 0;
        for out in &outcomes[g * folds..(g + 1) * folds] {
            match out {
                Ok(a) => {
                    sum += a;
                    used += 1;
                }
                Err(w) if g == 0 => warnings.push(w.clone()),
                Err(_) => {}
            }
        }
        scores.push(CvScore {
            weight_decay: lambda,
            mean_auc: (used > 0).then(|| sum / used as f64),
            folds_used: used,
        });
    }
    let mut best: Option<(f64, f64)> = None;
    for s in &scores {
        if let Some(a) = s.mean_auc {
            if best.is_none_or(|(b, _)| a > b) {
                best = Some((a, s.weight_decay));
            }
        }
    }
    let (_, weight_decay) =
        best.ok_or_else(|| Error::UndefinedMetric("every fold was skipped for every grid value".into()))?;
    let ranker = train_sgd(data, &TrainConfig { weight_decay, ..*base }, exec)?;
    Ok(CvResult { weight_decay, ranker, scores, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_auc(scores: &[f64], positive: &[bool]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &pi) in positive.iter().enumerate() {
            for (j, &pj) in positive.iter().enumerate() {
                if pi && !pj {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        let pos = [true, true, false, false];
        assert_eq!(auc(&[3.0, 4.0, 1.0, 2.0], &pos), Some(1.0));
        assert_eq!(auc(&[1.0, 2.0, 3.0, 4.0], &pos), Some(0.0));
        assert_eq!(auc(&[1.0; 4], &pos), Some(0.5));
        assert_eq!(auc(&[1.0, 2.0], &[true, true]), None);
    }

    #[test]
    fn auc_matches_pair_enumeration() {
        for s in 0..40u64 {
            let n = 2 + (s as usize * 7) % 49;
            let scores: Vec<f64> = (0..n).map(|i| ((i as u64 * 31 + s * 17) % 7) as f64).collect();
            let positive: Vec<bool> = (0..n).map(|i| (i as u64 * 13 + s).is_multiple_of(3)).collect();
            if let Some(a) = auc(&scores, &positive) {
                assert!((a - brute_auc(&scores, &positive)).abs() < 1e-12);
            }
        }
    }

    fn separable(n: usize) -> MultiLabelDataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = i % 2 == 0;
            let s = if y { 1.0 } else { -1.0 };
            features.extend([s * 2.0 + ((i * 37) % 11) as f64 / 11.0 - 0.5, ((i * 53) % 17) as f64 / 17.0]);
            labels.push(y);
        }
        MultiLabelDataset::new(2, 1, features, labels).unwrap()
    }

    #[test]
    fn cv_examples() {
        let data = separable(30);
        let base = TrainConfig { epochs: 10, seed: 3, ..Default::default() };
        let r = cv_select(&data, &[1e-2], 3, &base, Execution::Parallel).unwrap();
        assert_eq!(r.weight_decay, 1e-2);
        let a = cv_select(&data, &LAMBDA_GRID, 3, &base, Execution::Parallel).unwrap();
        let b = cv_select(&data, &LAMBDA_GRID, 3, &base, Execution::Sequential).unwrap();
        assert_eq!(a.weight_decay, b.weight_decay);
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.ranker, b.ranker);
        assert_eq!(macro_auc(&a.ranker, &data).unwrap(), 1.0);
    }

    #[test]
    fn all_degenerate_is_undefined() {
        let data = MultiLabelDataset::new(1, 1, vec![1.0, 2.0], vec![true, true]).unwrap();
        let r = LinearRanker::untrained(1, 1, TrainConfig::default());
        assert!(matches!(macro_auc(&r, &data), Err(Error::UndefinedMetric(_))));
    }
}
