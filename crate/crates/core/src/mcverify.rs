//! Generators of multi-graph dependent variables and Monte Carlo checks of
//! the tail bounds in [`crate::concentration`].
//!
//! Every generator produces, per task, a set of `[0, 1]`-valued variables
//! covered by unit-weight independent classes:
//!
//! * `IidBlocks { m }`: `m` independent draws per task, empty dependency graph.
//! * `BipartiteRanking { n_pos, n_neg }`: latents `u_1..u_{n_pos}` and
//!   `w_1..w_{n_neg}`, pair variables `g(u_p, w_q)`, covered by the
//!   equitable `max(n_pos, n_neg)`-class cover.
//!
//! `Z` is the sum of all variables. Bound parameters come from the centred
//! decomposition `Z_kj = Σ_{i∈I_kj} (x_i − E x_i)`, for which
//! `Z_kj − Z_kj^{\i} = x_i − E x_i ≤ 1`, `E[Z_kj] = 0` and
//! `v_kj = σ_kj² = Σ_{i∈I_kj} Var(x_i)`. Moments are analytic.
//!
//! Probability-form rows compare `P(Z ≥ E[Z] + t·s)` (or the lower tail)
//! with the bound at deviation `t·s`, where `s = √(v·W)` is the
//! dependency-inflated scale of the bound. Deviation-form rows compare
//! `P(Z ≥ E[Z] + d(t))` with `e^{−t}`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concentration::{
    bennett_lower_tail, bennett_tail_general, bennett_tail_refined, talagrand_certificate, talagrand_v, BlockVariance,
    TailBoundInput,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{split_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    IidBlocks { m: usize },
    BipartiteRanking { n_pos: usize, n_neg: usize },
}

impl Structure {
    /// `χ_f` of one task's dependency graph.
    pub fn chi(&self) -> f64 {
        match *self {
            Structure::IidBlocks { .. } => 1.0,
            Structure::BipartiteRanking { n_pos, n_neg } => n_pos.max(n_neg) as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Structure::IidBlocks { m: 0 } => Err(Error::Config("iid blocks need m ≥ 1".into())),
            Structure::BipartiteRanking { n_pos, n_neg } if n_pos == 0 || n_neg == 0 => {
                Err(Error::Config("bipartite structure needs n_pos, n_neg ≥ 1".into()))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for Structure {
    type Err = Error;

    /// `iid:<m>` or `bipartite:<n_pos>,<n_neg>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown structure {s:?} (expected iid:<m> or bipartite:<p>,<n>)"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> =
            args.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let st = match (kind.trim(), nums.as_slice()) {
            ("iid", [m]) => Structure::IidBlocks { m: *m },
            ("bipartite", [p, n]) => Structure::BipartiteRanking { n_pos: *p, n_neg: *n },
            _ => return Err(bad()),
        };
        st.validate()?;
        Ok(st)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::IidBlocks { m } => write!(f, "iid:{m}"),
            Structure::BipartiteRanking { n_pos, n_neg } => write!(f, "bipartite:{n_pos},{n_neg}"),
        }
    }
}

/// Base distribution of every latent draw, supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDist {
    Uniform,
    /// `high` with probability `p_high`, else `low`.
    TwoPoint {
        low: f64,
        high: f64,
        p_high: f64,
    },
}

impl BaseDist {
    pub fn point_mass(c: f64) -> Self {
        BaseDist::TwoPoint { low: c, high: c, p_high: 0.5 }
    }

    pub fn bernoulli(p: f64) -> Self {
        BaseDist::TwoPoint { low: 0.0, high: 1.0, p_high: p }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BaseDist::Uniform => Ok(()),
            BaseDist::TwoPoint { low, high, p_high } => {
                let in01 = |x: f64| (0.0..=1.0).contains(&x);
                if in01(low) && in01(high) && in01(p_high) {
                    Ok(())
                } else {
                    Err(Error::Config("two-point base needs low, high, p in [0, 1]".into()))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            BaseDist::Uniform => 0.5,
            BaseDist::TwoPoint { low, high, p_high } => low + p_high * (high - low),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            BaseDist::Uniform => 1.0 / 3.0,
            BaseDist::TwoPoint { low, high, p_high } => (1.0 - p_high) * low * low + p_high * high * high,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            BaseDist::Uniform => 1.0 / 12.0,
            BaseDist::TwoPoint { low, high, p_high } => p_high * (1.0 - p_high) * (high - low).powi(2),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            BaseDist::Uniform => rng.gen::<f64>(),
            BaseDist::TwoPoint { low, high, p_high } => {
                if rng.gen::<f64>() < p_high {
                    high
                } else {
                    low
                }
            }
        }
    }
}

impl FromStr for BaseDist {
    type Err = Error;

    /// `uniform`, `bernoulli:<p>`, `point:<c>` or `twopoint:<low>,<high>,<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown base distribution {s:?}"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?
        };
        let d = match (kind.trim(), nums.as_slice()) {
            ("uniform", []) => BaseDist::Uniform,
            ("bernoulli", [p]) => BaseDist::bernoulli(*p),
            ("point", [c]) => BaseDist::point_mass(*c),
            ("twopoint", [l, h, p]) => BaseDist::TwoPoint { low: *l, high: *h, p_high: *p },
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for BaseDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BaseDist::Uniform => write!(f, "uniform"),
            BaseDist::TwoPoint { low, high, p_high } => write!(f, "twopoint:{low},{high},{p_high}"),
        }
    }
}

/// Combines a positive latent `u` and a negative latent `w` into a pair variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKernel {
    /// `u·w`
    Product,
    /// `(u + w)/2`
    Mean,
    /// `u`
    Positive,
    /// `w`
    Negative,
}

impl PairKernel {
    fn apply(self, u: f64, w: f64) -> f64 {
        match self {
            PairKernel::Product => u * w,
            PairKernel::Mean => 0.5 * (u + w),
            PairKernel::Positive => u,
            PairKernel::Negative => w,
        }
    }

    fn moments(self, base: &BaseDist) -> (f64, f64) {
        let (m, v, s) = (base.mean(), base.variance(), base.second_moment());
        match self {
            PairKernel::Product => (m * m, s * s - m.powi(4)),
            PairKernel::Mean => (m, v / 2.0),
            PairKernel::Positive | PairKernel::Negative => (m, v),
        }
    }
}

impl FromStr for PairKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "product" => Ok(PairKernel::Product),
            "mean" => Ok(PairKernel::Mean),
            "positive" => Ok(PairKernel::Positive),
            "negative" => Ok(PairKernel::Negative),
            _ => Err(Error::Config(format!("unknown pair kernel {s:?}"))),
        }
    }
}

impl fmt::Display for PairKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairKernel::Product => "product",
            PairKernel::Mean => "mean",
            PairKernel::Positive => "positive",
            PairKernel::Negative => "negative",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependentSampler {
    pub structure: Structure,
    pub base: BaseDist,
    pub kernel: PairKernel,
    pub tasks: usize,
    pub seed: u64,
}

/// How moment parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    Analytic,
    PlugIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZSample {
    pub values: Vec<f64>,
    /// Exact `E[Z]` of the raw sum.
    pub mean: f64,
    /// Parameters of the centred decomposition.
    pub params: TailBoundInput,
    /// Variables per task (pairs for the bipartite structure).
    pub vars_per_task: usize,
}

impl DependentSampler {
    pub fn validate(&self) -> Result<()> {
        if self.tasks == 0 {
            return Err(Error::Config("task count must be ≥ 1".into()));
        }
        self.structure.validate()?;
        self.base.validate()
    }

    pub fn vars_per_task(&self) -> usize {
        match self.structure {
            Structure::IidBlocks { m } => m,
            Structure::BipartiteRanking { n_pos, n_neg } => n_pos * n_neg,
        }
    }

    /// Mean and variance of a single variable.
    pub fn var_moments(&self) -> (f64, f64) {
        match self.structure {
            Structure::IidBlocks { .. } => (self.base.mean(), self.base.variance()),
            Structure::BipartiteRanking { .. } => self.kernel.moments(&self.base),
        }
    }

    /// Sizes of the unit-weight classes of one task's cover.
    pub fn class_sizes(&self) -> Vec<usize> {
        match self.structure {
            Structure::IidBlocks { m } => vec![m],
            Structure::BipartiteRanking { n_pos, n_neg } => vec![n_pos.min(n_neg); n_pos.max(n_neg)],
        }
    }

    /// Centred-decomposition parameters (`E[Z] = 0`, `b = 1`).
    pub fn params(&self) -> TailBoundInput {
        let (_, var) = self.var_moments();
        let task: Vec<BlockVariance> =
            self.class_sizes().into_iter().map(|n| BlockVariance { weight: 1.0, v: n as f64 * var }).collect();
        let sigma_sq = (self.tasks * self.vars_per_task()) as f64 * var;
        TailBoundInput {
            blocks: vec![task; self.tasks],
            b: 1.0,
            ez: 0.0,
            sigma_sq,
            chi: vec![self.structure.chi(); self.tasks],
        }
    }

    /// Writes one trial's variables (all tasks, task-major) into `out`.
    fn draw_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>, latents: &mut Vec<f64>) {
        out.clear();
        for _ in 0..self.tasks {
            match self.structure {
                Structure::IidBlocks { m } => out.extend((0..m).map(|_| self.base.draw(rng))),
                Structure::BipartiteRanking { n_pos, n_neg } => {
                    latents.clear();
                    latents.extend((0..n_pos + n_neg).map(|_| self.base.draw(rng)));
                    let (u, w) = latents.split_at(n_pos);
                    for &up in u {
                        out.extend(w.iter().map(|&wq| self.kernel.apply(up, wq)));
                    }
                }
            }
        }
    }

    fn trial_sum(&self, index: u64, master: u64) -> f64 {
        let mut rng = stream(master, index);
        let (mut vars, mut lat) = (Vec::new(), Vec::new());
        self.draw_into(&mut rng, &mut vars, &mut lat);
        vars.iter().sum()
    }

    fn trial_sup(&self, index: u64, master: u64, mu: f64) -> f64 {
        let mut rng = stream(master, index);
        let (mut vars, mut lat) = (Vec::new(), Vec::new());
        self.draw_into(&mut rng, &mut vars, &mut lat);
        let per = self.vars_per_task();
        vars.chunks(per).map(|task| task.iter().map(|x| x - mu).sum::<f64>().abs()).sum()
    }
}

/// Draws `n_trials` realizations of `Z` (trial `i` uses stream `i` of the
/// sampler seed) together with the exact moment parameters.
pub fn sample_z(sampler: &DependentSampler, n_trials: usize, exec: Execution) -> Result<ZSample> {
    sampler.validate()?;
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be ≥ 1".into()));
    }
    let values = exec.map(n_trials, |i| sampler.trial_sum(i as u64, sampler.seed));
    let (mu, _) = sampler.var_moments();
    let vars_per_task = sampler.vars_per_task();
    Ok(ZSample { values, mean: (sampler.tasks * vars_per_task) as f64 * mu, params: sampler.params(), vars_per_task })
}

/// Realizations of the supremum process `Z = Σ_k |Σ_{i∈task k} (x_i − E x_i)|`
/// (class `{x ↦ ±(x − E x)}` per task).
pub fn sample_sup(sampler: &DependentSampler, n_trials: usize, master: u64, exec: Execution) -> Result<Vec<f64>> {
    sampler.validate()?;
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be ≥ 1".into()));
    }
    let (mu, _) = sampler.var_moments();
    Ok(exec.map(n_trials, |i| sampler.trial_sup(i as u64, master, mu)))
}

/// Fraction of samples `≥ threshold` and its binomial standard error.
pub fn empirical_tail(samples: &[f64], threshold: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Domain("empirical_tail needs at least one sample".into()));
    }
    let hits = samples.iter().filter(|&&x| x >= threshold).count();
    Ok(freq_stderr(hits, samples.len()))
}

fn empirical_lower_tail(samples: &[f64], threshold: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Domain("empirical tail needs at least one sample".into()));
    }
    let hits = samples.iter().filter(|&&x| x <= threshold).count();
    Ok(freq_stderr(hits, samples.len()))
}

fn freq_stderr(hits: usize, n: usize) -> (f64, f64) {
    let freq = hits as f64 / n as f64;
    (freq, (freq * (1.0 - freq) / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    BennettGeneral,
    BennettRefined,
    LowerTail,
    Talagrand,
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bennett_general" => Ok(Inequality::BennettGeneral),
            "bennett_refined" => Ok(Inequality::BennettRefined),
            "lower_tail" => Ok(Inequality::LowerTail),
            "talagrand" => Ok(Inequality::Talagrand),
            _ => Err(Error::Config(format!(
                "unknown inequality {s:?} (bennett_general, bennett_refined, lower_tail, talagrand)"
            ))),
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::BennettGeneral => "bennett_general",
            Inequality::BennettRefined => "bennett_refined",
            Inequality::LowerTail => "lower_tail",
            Inequality::Talagrand => "talagrand",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Deviation from the mean that defines the event.
    pub deviation: f64,
    pub empirical_freq: f64,
    pub stderr: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub inequality: Inequality,
    pub n_trials: usize,
    pub param_mode: ParamMode,
    pub mean_z: f64,
    pub v: f64,
    pub w: f64,
    pub u: f64,
    /// Unit of `t` in probability-form rows (`√(v·W)`); 0 for deviation form.
    pub scale: f64,
    pub rows: Vec<TailRow>,
    /// Indices into `rows` of flagged thresholds.
    pub violations: Vec<usize>,
}

impl TailReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Monte Carlo slack: a row is flagged only when `freq − 3·stderr > bound`.
pub const STDERR_SLACK: f64 = 3.0;

fn finish_report(
    inequality: Inequality,
    n_trials: usize,
    param_mode: ParamMode,
    mean_z: f64,
    input: &TailBoundInput,
    scale: f64,
    rows: Vec<TailRow>,
) -> TailReport {
    let violations = rows.iter().enumerate().filter(|(_, r)| r.violated).map(|(i, _)| i).collect();
    TailReport {
        inequality,
        n_trials,
        param_mode,
        mean_z,
        v: input.v(),
        w: input.w(),
        u: input.u(),
        scale,
        rows,
        violations,
    }
}

fn row(t: f64, deviation: f64, (freq, se): (f64, f64), bound: f64) -> TailRow {
    TailRow { t, deviation, empirical_freq: freq, stderr: se, bound, violated: freq - STDERR_SLACK * se > bound }
}

/// Compares realized `Z` values with a probability-form bound evaluated on
/// `input`. Thresholds are `mean ± t·scale`.
pub fn probability_form_report(
    samples: &[f64],
    mean: f64,
    input: &TailBoundInput,
    inequality: Inequality,
    scale: f64,
    t_grid: &[f64],
) -> Result<TailReport> {
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t grid entries must be ≥ 0, got {t}")));
        }
        let d = t * scale;
        let (emp, bound) = match inequality {
            Inequality::BennettGeneral => {
                let b = if d > 0.0 { bennett_tail_general(input, d)?.p_tight } else { 1.0 };
                (empirical_tail(samples, mean + d)?, b)
            }
            Inequality::BennettRefined => {
                let b = if d > 0.0 { bennett_tail_refined(input, d)? } else { 1.0 };
                (empirical_tail(samples, mean + d)?, b)
            }
            Inequality::LowerTail => {
                let b = if d > 0.0 { bennett_lower_tail(input, d)? } else { 1.0 };
                (empirical_lower_tail(samples, mean - d)?, b)
            }
            Inequality::Talagrand => {
                return Err(Error::Mode("talagrand uses the deviation form".into()));
            }
        };
        rows.push(row(t, d, emp, bound));
    }
    Ok(finish_report(inequality, samples.len(), ParamMode::Analytic, mean, input, scale, rows))
}

/// Runs one inequality check on a sampler.
pub fn verify_inequality(
    sampler: &DependentSampler,
    inequality: Inequality,
    t_grid: &[f64],
    n_trials: usize,
    exec: Execution,
) -> Result<TailReport> {
    sampler.validate()?;
    let input = sampler.params();
    if inequality == Inequality::BennettRefined && !input.all_unit_weights() {
        return Err(Error::Mode("refined inequality requires unit cover weights".into()));
    }
    match inequality {
        Inequality::Talagrand => verify_talagrand(sampler, t_grid, n_trials, exec),
        _ => {
            let sample = sample_z(sampler, n_trials, exec)?;
            input.validate()?;
            let scale = (input.v() * input.w()).sqrt();
            probability_form_report(&sample.values, sample.mean, &input, inequality, scale, t_grid)
        }
    }
}

/// Deviation-form check of the Talagrand inequality: `E[Z]` of the
/// supremum is a plug-in estimate from an independent calibration run of
/// `10 × n_trials` draws.
fn verify_talagrand(
    sampler: &DependentSampler,
    t_grid: &[f64],
    n_trials: usize,
    exec: Execution,
) -> Result<TailReport> {
    let samples = sample_sup(sampler, n_trials, sampler.seed, exec)?;
    let calib_seed = split_seed(sampler.seed, u64::MAX);
    let calib = sample_sup(sampler, 10 * n_trials, calib_seed, exec)?;
    let ez = calib.iter().sum::<f64>() / calib.len() as f64;

    let input = sampler.params();
    let blocks: Vec<(f64, f64)> = input.blocks.iter().flatten().map(|b| (b.weight, b.v)).collect();
    let v = talagrand_v(&blocks, ez)?;
    let report_input = TailBoundInput { ez, b: 1.0, ..input.clone() };
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t grid entries must be ≥ 0, got {t}")));
        }
        let (d, bound) = if t > 0.0 && v > 0.0 {
            (talagrand_certificate(v, &input.chi, t, false)?.deviation, (-t).exp())
        } else {
            (0.0, 1.0)
        };
        rows.push(row(t, d, empirical_tail(&samples, ez + d)?, bound));
    }
    let mut report = finish_report(Inequality::Talagrand, n_trials, ParamMode::PlugIn, ez, &report_input, 0.0, rows);
    report.v = v;
    Ok(report)
}
