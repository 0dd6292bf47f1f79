//! Seeded synthetic multi-label data.
//!
//! Label `k` of sample `i` is positive with probability `p_k`, drawn once per
//! label from the prevalence range. Features are
//! `x_i = offset·1/√D + σ·ε_i + signal·Σ_k y_ik u_k` with `ε_i` standard
//! normal and `u_k` random unit directions. The constant offset cancels in
//! every pair difference, so it changes `M̄` but not what can be learned.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub prevalence: (f64, f64),
    pub signal: f64,
    pub noise: f64,
    pub offset: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Few labels relative to the sample size.
    pub fn few_labels(seed: u64) -> Self {
        Self {
            n_samples: 200,
            n_features: 20,
            n_labels: 4,
            prevalence: (0.3, 0.5),
            signal: 2.5,
            noise: 1.0,
            offset: 20.0,
            seed,
        }
    }

    /// Many rare labels and few samples: 180 samples, so 120 train under a 2:1 split.
    pub fn many_labels(seed: u64) -> Self {
        Self {
            n_samples: 180,
            n_features: 20,
            n_labels: 60,
            prevalence: (0.05, 0.2),
            signal: 1.0,
            noise: 0.2,
            offset: 0.0,
            seed,
        }
    }
}

pub fn synthetic_dataset(cfg: &SyntheticConfig) -> Result<MultiLabelDataset> {
    let (lo, hi) = cfg.prevalence;
    if !(0.0 < lo && lo <= hi && hi < 1.0) {
        return Err(Error::Config(format!("prevalence range ({lo}, {hi}) must satisfy 0 < lo ≤ hi < 1")));
    }
    if cfg.n_samples == 0 || cfg.n_features == 0 || cfg.n_labels == 0 {
        return Err(Error::Config("sample, feature and label counts must be positive".into()));
    }
    let (n, d, k) = (cfg.n_samples, cfg.n_features, cfg.n_labels);
    let mut rng = stream(cfg.seed, 0);
    let p: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..=hi)).collect();
    let dirs: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let base = cfg.offset / (d as f64).sqrt();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n * k);
    for _ in 0..n {
        let y: Vec<bool> = p.iter().map(|&pk| rng.gen_bool(pk)).collect();
        let mut x: Vec<f64> =
            (0..d).map(|_| base + cfg.noise * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        for (yk, u) in y.iter().zip(&dirs) {
            if *yk {
                for (xj, uj) in x.iter_mut().zip(u) {
                    *xj += cfg.signal * uj;
                }
            }
        }
        features.extend(x);
        labels.extend(y);
    }
    MultiLabelDataset::new(d, k, features, labels)
}
