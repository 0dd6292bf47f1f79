//! Multi-label datasets and the `mlsvm` text format.
//!
//! ```text
//! #samples=3 #features=4 #labels=2
//! 0,1<TAB>0:1.5 3:-2
//! <TAB>1:0.25
//! 1<TAB>
//! ```
//!
//! Label lists hold the 0-based indices of positive labels; features are
//! sparse 0-based `index:value` pairs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    n_features: usize,
    n_labels: usize,
    /// Row-major dense features.
    features: Vec<f64>,
    /// Row-major `n × K`, `true` for a positive label.
    labels: Vec<bool>,
}

impl MultiLabelDataset {
    pub fn new(n_features: usize, n_labels: usize, features: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if n_labels == 0 {
            return Err(Error::Format("dataset needs at least one label".into()));
        }
        let n = labels.len() / n_labels;
        if labels.len() != n * n_labels || features.len() != n * n_features {
            return Err(Error::Format(format!(
                "{} feature values and {} label values do not fit {n_features} features and {n_labels} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("feature values must be finite".into()));
        }
        Ok(Self { n_features, n_labels, features, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len() / self.n_labels
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn is_positive(&self, i: usize, k: usize) -> bool {
        self.labels[i * self.n_labels + k]
    }

    /// `±1` label value.
    pub fn label(&self, i: usize, k: usize) -> i8 {
        if self.is_positive(i, k) {
            1
        } else {
            -1
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len() * self.n_labels);
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.extend_from_slice(&self.labels[i * self.n_labels..(i + 1) * self.n_labels]);
        }
        Self { n_features: self.n_features, n_labels: self.n_labels, features, labels }
    }

    /// `max_i ‖x_i‖₂`.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.n_samples()).map(|i| self.row(i).iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, usize)> {
    let bad = || Error::Parse { line: 1, message: "header must be `#samples=N #features=D #labels=K`".into() };
    let mut vals = [None; 3];
    for tok in line.split_whitespace() {
        let (key, val) = tok.trim_start_matches('#').split_once('=').ok_or_else(bad)?;
        let slot = match key {
            "samples" => 0,
            "features" => 1,
            "labels" => 2,
            _ => return Err(bad()),
        };
        vals[slot] = Some(val.parse::<usize>().map_err(|_| bad())?);
    }
    match vals {
        [Some(n), Some(d), Some(k)] => Ok((n, d, k)),
        _ => Err(bad()),
    }
}

pub fn parse_mlsvm(text: &str) -> Result<MultiLabelDataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty file".into() })?;
    let (n, d, k) = parse_header(header)?;
    if k == 0 {
        return Err(Error::Format("header declares zero labels".into()));
    }
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n * k);
    let mut rows = 0;
    for (line, l) in lines {
        let l = l.trim_end_matches('\r');
        // A lone tab is a sample with no labels and no features.
        if l.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let (label_part, feat_part) = l.split_once('\t').unwrap_or((l, ""));
        let mut row_labels = vec![false; k];
        for tok in label_part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let j: usize = tok.parse().map_err(|_| err(format!("bad label index {tok:?}")))?;
            if j >= k {
                return Err(err(format!("label index {j} not below {k}")));
            }
            row_labels[j] = true;
        }
        let mut row = vec![0.0; d];
        let mut seen = vec![false; d];
        for tok in feat_part.split_whitespace() {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
            let j: usize = idx.parse().map_err(|_| err(format!("bad feature index {idx:?}")))?;
            if j >= d {
                return Err(err(format!("feature index {j} not below {d}")));
            }
            if seen[j] {
                return Err(err(format!("feature {j} given twice")));
            }
            let v: f64 = val.parse().map_err(|_| err(format!("bad feature value {val:?}")))?;
            if !v.is_finite() {
                return Err(err(format!("feature value {val:?} is not finite")));
            }
            seen[j] = true;
            row[j] = v;
        }
        features.extend(row);
        labels.extend(row_labels);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Format(format!("header declares {n} samples but the file has {rows}")));
    }
    MultiLabelDataset::new(d, k, features, labels)
}

pub fn load_dataset(path: &Path) -> Result<MultiLabelDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mlsvm(&text)
}

pub fn format_mlsvm(data: &MultiLabelDataset) -> String {
    let mut out = format!("#samples={} #features={} #labels={}\n", data.n_samples(), data.n_features, data.n_labels);
    for i in 0..data.n_samples() {
        let pos: Vec<String> = (0..data.n_labels).filter(|&k| data.is_positive(i, k)).map(|k| k.to_string()).collect();
        out.push_str(&pos.join(","));
        out.push('\t');
        let mut first = true;
        for (j, v) in data.row(i).iter().enumerate().filter(|(_, v)| **v != 0.0) {
            let _ = write!(out, "{}{j}:{v}", if first { "" } else { " " });
            first = false;
        }
        out.push('\n');
    }
    out
}
