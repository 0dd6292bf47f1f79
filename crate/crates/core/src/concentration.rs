//! Bennett-, Bernstein- and Talagrand-type tail bounds for sums of
//! multi-graph dependent variables.
//!
//! Notation used throughout: `W = Σ_k χ_f(G_k)` is the total fractional
//! chromatic number, `v = (1 + b)·E[Z] + σ²` the variance proxy, and
//!
//! ```text
//! U = Σ_k Σ_j ω_kj · max(1, sqrt(v_kj · W / v))
//! ```
//!
//! the block-heterogeneity factor. Since `Σ ω_kj v_kj ≤ v`, `W ≤ U ≤ 5W/4`.
//! All probabilities are evaluated in log space and exponentiated last.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `φ(x) = (1 + x)·ln(1 + x) − x` for `x ≥ 0`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("phi requires x ≥ 0, got {x}")));
    }
    Ok((1.0 + x) * x.ln_1p() - x)
}

/// `ψ(x) = e^{−x} + x − 1`.
pub fn psi(x: f64) -> f64 {
    (-x).exp_m1() + x
}

/// One block `(ω_kj, v_kj)` of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockVariance {
    pub weight: f64,
    pub v: f64,
}

/// Parameter bundle shared by all tail-bound forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundInput {
    /// Per-task blocks; may be empty when only aggregates are known.
    pub blocks: Vec<Vec<BlockVariance>>,
    pub b: f64,
    pub ez: f64,
    pub sigma_sq: f64,
    /// χ_f(G_k) per task.
    pub chi: Vec<f64>,
}

impl TailBoundInput {
    /// Bundle with aggregates only; `U` then defaults to `5W/4`.
    pub fn aggregate(b: f64, ez: f64, sigma_sq: f64, chi: Vec<f64>) -> Self {
        Self { blocks: Vec::new(), b, ez, sigma_sq, chi }
    }

    pub fn v(&self) -> f64 {
        (1.0 + self.b) * self.ez + self.sigma_sq
    }

    pub fn w(&self) -> f64 {
        self.chi.iter().sum()
    }

    pub fn has_blocks(&self) -> bool {
        !self.blocks.is_empty()
    }

    /// `U` from the blocks, or `5W/4` when they are absent.
    pub fn u(&self) -> f64 {
        let w = self.w();
        if !self.has_blocks() {
            return 1.25 * w;
        }
        let v = self.v();
        self.blocks.iter().flatten().map(|blk| blk.weight * (blk.v * w / v).sqrt().max(1.0)).sum()
    }

    pub fn all_unit_weights(&self) -> bool {
        self.blocks.iter().flatten().all(|b| b.weight == 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.v();
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Invariant(format!("v = (1+b)E[Z] + σ² must be positive, got {v}")));
        }
        if self.chi.is_empty() || self.chi.iter().any(|&c| !(c >= 1.0)) {
            return Err(Error::Invariant("every χ_f(G_k) must be ≥ 1".into()));
        }
        if !self.has_blocks() {
            return Ok(());
        }
        if self.blocks.len() != self.chi.len() {
            return Err(Error::Structural(format!("{} block lists for {} tasks", self.blocks.len(), self.chi.len())));
        }
        let mut weighted_v = 0.0;
        for (k, (task, &chi)) in self.blocks.iter().zip(&self.chi).enumerate() {
            let mut total = 0.0;
            for blk in task {
                if !(blk.weight > 0.0 && blk.weight <= 1.0) {
                    return Err(Error::Invariant(format!("block weight {} outside (0,1]", blk.weight)));
                }
                if !(blk.v >= 0.0) {
                    return Err(Error::Invariant(format!("block variance factor {} < 0", blk.v)));
                }
                total += blk.weight;
                weighted_v += blk.weight * blk.v;
            }
            if (total - chi).abs() > 1e-9 * chi.max(1.0) {
                return Err(Error::Invariant(format!("task {k}: block weights sum to {total}, χ_f = {chi}")));
            }
        }
        if weighted_v > v * (1.0 + 1e-9) {
            return Err(Error::Invariant(format!("Σ ω_kj v_kj = {weighted_v} exceeds v = {v}")));
        }
        Ok(())
    }
}

/// Which inequality produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    BennettGeneral,
    BennettRefined,
    LowerTail,
    Talagrand,
    TalagrandRefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralBennett {
    /// `exp(−(v/W)·φ(tW/(Uv)))`.
    pub p_tight: f64,
    /// `exp(−(v/W)·φ(4t/(5v)))`.
    pub p_simple: f64,
    /// False when `U` fell back to `5W/4`, in which case `p_tight == p_simple`.
    pub u_from_blocks: bool,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be positive and finite, got {t}")));
    }
    Ok(())
}

/// Upper-tail bound for `P(Z ≥ E[Z] + t)` with general cover weights.
pub fn bennett_tail_general(input: &TailBoundInput, t: f64) -> Result<GeneralBennett> {
    check_t(t)?;
    input.validate()?;
    let (v, w, u) = (input.v(), input.w(), input.u());
    let log_simple = -(v / w) * phi(0.8 * t / v)?;
    let log_tight = -(v / w) * phi(t * w / (u * v))?;
    Ok(GeneralBennett { p_tight: log_tight.exp(), p_simple: log_simple.exp(), u_from_blocks: input.has_blocks() })
}

/// `√(2cvt) + 2ct/3`: with `c = (25/16)·W` this is the deviation exceeded
/// with probability at most `e^{−t}` under the general inequality.
pub fn bernstein_deviation(c: f64, v: f64, t: f64) -> Result<f64> {
    if !(c > 0.0 && v > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("bernstein_deviation needs c, v, t > 0 (got {c}, {v}, {t})")));
    }
    Ok((2.0 * c * v * t).sqrt() + 2.0 * c * t / 3.0)
}

/// `c·√(2vt) + 2ct/3` with `c = W`: deviation certificate of the unit-weight
/// (refined) inequality.
pub fn refined_deviation(c: f64, v: f64, t: f64) -> Result<f64> {
    if !(c > 0.0 && v > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("refined_deviation needs c, v, t > 0 (got {c}, {v}, {t})")));
    }
    Ok(c * (2.0 * v * t).sqrt() + 2.0 * c * t / 3.0)
}

/// `c = (25/16)·W` for the general inequality.
pub fn general_c(chi: &[f64]) -> f64 {
    25.0 / 16.0 * chi.iter().sum::<f64>()
}

/// `exp(−v·φ(t/(vW)))`; valid only when every cover weight equals one.
/// With a single task and `χ_f = 1` this is the classical Bennett bound.
pub fn bennett_tail_refined(input: &TailBoundInput, t: f64) -> Result<f64> {
    check_t(t)?;
    if !input.all_unit_weights() {
        return Err(Error::Mode("refined bound requires every cover weight ω_kj = 1".into()));
    }
    input.validate()?;
    let (v, w) = (input.v(), input.w());
    Ok((-v * phi(t / (v * w))?).exp())
}

/// Bound on the lower tail `P(Z ≤ E[Z] − t)`; the same expression as
/// [`GeneralBennett::p_simple`].
pub fn bennett_lower_tail(input: &TailBoundInput, t: f64) -> Result<f64> {
    Ok(bennett_tail_general(input, t)?.p_simple)
}

/// Union bound for `P(|Z − E[Z]| ≥ t)`, clipped at one.
pub fn two_sided(one_sided: f64) -> f64 {
    (2.0 * one_sided).min(1.0)
}

/// Talagrand variance proxy `v = Σ ω_kj σ_kj² + 2E[Z]` from `(ω, σ²)` blocks.
pub fn talagrand_v(blocks: &[(f64, f64)], ez: f64) -> Result<f64> {
    if !(ez >= 0.0) {
        return Err(Error::Domain(format!("E[Z] of a supremum process must be ≥ 0, got {ez}")));
    }
    let mut acc = 0.0;
    for &(w, s2) in blocks {
        if !(s2 >= 0.0) {
            return Err(Error::Domain(format!("negative σ² = {s2}")));
        }
        acc += w * s2;
    }
    Ok(acc + 2.0 * ez)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationCertificate {
    pub t: f64,
    pub deviation: f64,
    pub form: BoundForm,
}

/// With probability at least `1 − e^{−t}`, `Z ≤ E[Z] + deviation`.
pub fn talagrand_certificate(v: f64, chi: &[f64], t: f64, refined: bool) -> Result<DeviationCertificate> {
    let w: f64 = chi.iter().sum();
    let (deviation, form) = if refined {
        (refined_deviation(w, v, t)?, BoundForm::TalagrandRefined)
    } else {
        (bernstein_deviation(general_c(chi), v, t)?, BoundForm::Talagrand)
    };
    Ok(DeviationCertificate { t, deviation, form })
}
