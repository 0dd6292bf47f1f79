//! Spectra, closed-form `r*` upper bounds and excess-risk assemblies.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

const SYM_TOL: f64 = 1e-8;
const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    KernelGram,
    WeightSvd,
}

/// Nonincreasing, nonnegative spectrum. Entries past the end are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub values: Vec<f64>,
    pub source: SpectrumSource,
    /// `None` for a spectrum shared by all tasks.
    pub task: Option<usize>,
}

impl SpectrumProfile {
    pub fn new(mut values: Vec<f64>, source: SpectrumSource, task: Option<usize>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -CLAMP_TOL) {
            return Err(Error::Domain(format!("spectrum entry {v} is negative or not finite")));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, source, task })
    }

    /// `tails[d] = Σ_{l>d} λ_l` for `d = 0..=len`.
    pub fn tail_sums(&self) -> Vec<f64> {
        let mut tails = vec![0.0; self.values.len() + 1];
        for d in (0..self.values.len()).rev() {
            tails[d] = tails[d + 1] + self.values[d];
        }
        tails
    }
}

/// Eigenvalues of `gram / m`, the empirical estimate of the kernel operator spectrum.
pub fn spectrum_from_gram(gram: &DMatrix<f64>) -> Result<SpectrumProfile> {
    let (r, c) = gram.shape();
    if r != c {
        return Err(Error::Domain(format!("Gram matrix is {r}x{c}")));
    }
    if r == 0 {
        return SpectrumProfile::new(Vec::new(), SpectrumSource::KernelGram, None);
    }
    let scale = gram.amax().max(1.0);
    if (gram - gram.transpose()).amax() > SYM_TOL * scale {
        return Err(Error::Domain("Gram matrix is not symmetric".into()));
    }
    let m = r as f64;
    let eig = SymmetricEigen::new(gram / m);
    if eig.eigenvalues.iter().any(|&l| l < -SYM_TOL * scale) {
        return Err(Error::Domain("Gram matrix is not positive semidefinite".into()));
    }
    let values = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    SpectrumProfile::new(values, SpectrumSource::KernelGram, None)
}

/// Squared singular values of the `K×D` weight matrix.
pub fn spectrum_from_weights(theta: &DMatrix<f64>) -> Result<SpectrumProfile> {
    if theta.is_empty() {
        return SpectrumProfile::new(Vec::new(), SpectrumSource::WeightSvd, None);
    }
    let values = theta.singular_values().iter().map(|s| s * s).collect();
    SpectrumProfile::new(values, SpectrumSource::WeightSvd, None)
}

/// Per-label quantities of the Macro-AUC instantiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAucParams {
    pub tau: Vec<f64>,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub m: Vec<f64>,
    pub chi: Vec<f64>,
    /// `M̃`, bound on the per-task weight norm.
    pub weight_norm: f64,
    /// `M̄`, bound on the feature norm.
    pub feature_norm: f64,
    pub mu: f64,
    pub b: f64,
    pub t: f64,
    pub macro_auc: Option<MacroAucParams>,
}

impl BoundParams {
    pub fn new(m: Vec<f64>, chi: Vec<f64>, weight_norm: f64, feature_norm: f64, t: f64) -> Result<Self> {
        let p = Self { m, chi, weight_norm, feature_norm, mu: 1.0, b: 1.0, t, macro_auc: None };
        p.validate()?;
        Ok(p)
    }

    /// `m_k = ñ²τ_k(1−τ_k)`, `χ_k = (1−τ_k)ñ`, with `μ = B = 1`.
    pub fn macro_auc(tau: Vec<f64>, n: f64, weight_norm: f64, feature_norm: f64, t: f64) -> Result<Self> {
        check_tau(&tau)?;
        if !(n > 0.0) {
            return Err(Error::Domain(format!("sample count must be positive, got {n}")));
        }
        let m = tau.iter().map(|t| n * n * t * (1.0 - t)).collect();
        let chi = tau.iter().map(|t| (1.0 - t) * n).collect();
        let p =
            Self { m, chi, weight_norm, feature_norm, mu: 1.0, b: 1.0, t, macro_auc: Some(MacroAucParams { tau, n }) };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_b(mut self, b: f64) -> Result<Self> {
        self.b = b;
        self.validate()?;
        Ok(self)
    }

    pub fn n_tasks(&self) -> usize {
        self.m.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.is_empty() {
            return Err(Error::Domain("at least one task is required".into()));
        }
        if self.m.len() != self.chi.len() {
            return Err(Error::Domain(format!("{} task sizes but {} chromatic numbers", self.m.len(), self.chi.len())));
        }
        if let Some(x) = self.m.iter().chain(&self.chi).find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("task sizes and chromatic numbers must be positive, got {x}")));
        }
        for (name, x) in [("M̃", self.weight_norm), ("t", self.t)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Domain(format!("{name} must be nonnegative, got {x}")));
            }
        }
        for (name, x) in [("M̄", self.feature_norm), ("μ", self.mu), ("B", self.b)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {x}")));
            }
        }
        if let Some(ma) = &self.macro_auc {
            check_tau(&ma.tau)?;
            if ma.tau.len() != self.m.len() {
                return Err(Error::Domain("τ has the wrong length".into()));
            }
        }
        Ok(())
    }

    /// `χ_k / (K m_k)` per task.
    fn ratios(&self) -> Vec<f64> {
        let k = self.n_tasks() as f64;
        self.chi.iter().zip(&self.m).map(|(c, m)| c / (k * m)).collect()
    }

    fn macro_params(&self) -> Result<&MacroAucParams> {
        self.macro_auc.as_ref().ok_or_else(|| Error::Mode("formula needs Macro-AUC parameters (τ, ñ)".into()))
    }
}

fn check_tau(tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::Domain("at least one label is required".into()));
    }
    for (k, &t) in tau.iter().enumerate() {
        if t == 0.0 {
            return Err(Error::DegenerateLabel(k));
        }
        if !(t > 0.0 && t <= 0.5) {
            return Err(Error::Domain(format!("τ_{k} = {t} outside (0, 0.5]")));
        }
    }
    Ok(())
}

/// Minimized `r*` bound and the minimizing cut(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RStar {
    pub value: f64,
    pub cuts: Vec<usize>,
}

/// Range of cuts `d` searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutGrid {
    /// `0..=len(spectrum)`.
    Full,
    /// `0..=max`.
    UpTo(usize),
}

impl CutGrid {
    /// `d ≤ ⌊min(D, K)·rate⌋`.
    pub fn experiment(n_features: usize, n_labels: usize, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Domain(format!("rate must lie in [0, 1], got {rate}")));
        }
        Ok(CutGrid::UpTo((n_features.min(n_labels) as f64 * rate).floor() as usize))
    }

    fn max(self, len: usize) -> usize {
        match self {
            CutGrid::Full => len,
            CutGrid::UpTo(d) => d,
        }
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (d, v) in values.enumerate() {
        if v < best.1 {
            best = (d, v);
        }
    }
    best
}

/// `Σ_k min_{d_k} ( d_k·χ_k/(K m_k) + M̃ √(χ_k/(K m_k) · Σ_{l>d_k} λ_kl) )`.
pub fn rstar_kernel(spectra: &[SpectrumProfile], params: &BoundParams, exec: Execution) -> Result<RStar> {
    params.validate()?;
    if spectra.len() != params.n_tasks() {
        return Err(Error::Domain(format!("{} spectra for {} tasks", spectra.len(), params.n_tasks())));
    }
    let ratios = params.ratios();
    let per_task = exec.map(spectra.len(), |k| {
        let tails = spectra[k].tail_sums();
        let a = ratios[k];
        argmin(tails.iter().enumerate().map(|(d, tail)| d as f64 * a + params.weight_norm * (a * tail).sqrt()))
    });
    Ok(RStar { value: per_task.iter().map(|(_, v)| v).sum(), cuts: per_task.iter().map(|(d, _)| *d).collect() })
}

/// `min_d Σ_k ( (d/M̄²)·χ_k/(K m_k) + M̃ √(χ_k/(K m_k) · Σ_{l>d} λ̃_l²) )` with one
/// cut shared by all tasks.
pub fn rstar_linear(spectrum: &SpectrumProfile, params: &BoundParams, grid: CutGrid) -> Result<RStar> {
    params.validate()?;
    let tails = spectrum.tail_sums();
    let ratios = params.ratios();
    let sum_ratio: f64 = ratios.iter().sum();
    let m2 = params.feature_norm * params.feature_norm;
    let (d, value) = argmin((0..=grid.max(spectrum.values.len())).map(|d| {
        let tail = tails.get(d).copied().unwrap_or(0.0);
        d as f64 / m2 * sum_ratio + params.weight_norm * ratios.iter().map(|a| (a * tail).sqrt()).sum::<f64>()
    }));
    Ok(RStar { value, cuts: vec![d] })
}

/// The experiment-mode `r*`: twice [`rstar_linear`].
pub fn rstar_experiment(spectrum: &SpectrumProfile, params: &BoundParams, grid: CutGrid) -> Result<RStar> {
    params.macro_params()?;
    let r = rstar_linear(spectrum, params, grid)?;
    Ok(RStar { value: 2.0 * r.value, cuts: r.cuts })
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("r must be nonnegative, got {r}")));
    }
    Ok(())
}

/// `(704/B)·r + (26B + 22)·(25/16)·(Σ χ_k/m_k)·t/K`.
pub fn excess_bound_general(r: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    check_r(r)?;
    let b = params.b;
    let sum: f64 = params.chi.iter().zip(&params.m).map(|(c, m)| c / m).sum();
    Ok(704.0 / b * r + (26.0 * b + 22.0) * (25.0 / 16.0) * sum * params.t / params.n_tasks() as f64)
}

/// `704·μ·r* + (75/K)·Σ(1/τ_k)·t/ñ`.
pub fn bound_ours_macroauc(rstar: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    check_r(rstar)?;
    let ma = params.macro_params()?;
    let inv: f64 = ma.tau.iter().map(|t| 1.0 / t).sum();
    Ok(704.0 * params.mu * rstar + 75.0 / ma.tau.len() as f64 * inv * params.t / ma.n)
}

/// `2[(4μM̄M̃/√ñ)·mean √(1/τ_k) + 3√((ln 2 + t)/(2ñ))·√(mean 1/τ_k)]`.
pub fn bound_prior_macroauc(params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let ma = params.macro_params()?;
    let k = ma.tau.len() as f64;
    let mean_sqrt = ma.tau.iter().map(|t| (1.0 / t).sqrt()).sum::<f64>() / k;
    let mean_inv = ma.tau.iter().map(|t| 1.0 / t).sum::<f64>() / k;
    let first = 4.0 * params.mu * params.feature_norm * params.weight_norm / ma.n.sqrt() * mean_sqrt;
    let second = 3.0 * ((2f64.ln() + params.t) / (2.0 * ma.n)).sqrt() * mean_inv.sqrt();
    Ok(2.0 * (first + second))
}

/// `(704/B)·r* + (26B + 22)·(25/16)·(1/ñ)·Σ(1/τ_k)·t/K`.
pub fn bound_kernel_macroauc(rstar: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    check_r(rstar)?;
    let ma = params.macro_params()?;
    let b = params.b;
    let inv: f64 = ma.tau.iter().map(|t| 1.0 / t).sum();
    Ok(704.0 / b * rstar + (26.0 * b + 22.0) * (25.0 / 16.0) / ma.n * inv * params.t / ma.tau.len() as f64)
}
