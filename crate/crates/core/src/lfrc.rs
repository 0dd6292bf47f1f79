//! Empirical local fractional Rademacher complexity of norm-bounded linear
//! classes, and sub-root fixed points.
//!
//! For task `k` with samples `x_i` covered by `{(I_kj, ω_kj)}` and one
//! Rademacher sign `ζ_i` per sample, the aggregate is
//!
//! ```text
//! c_k = Σ_j (ω_kj / m_k) Σ_{i∈I_kj} ζ_i x_i
//! ```
//!
//! and the estimator averages `(1/K) Σ_k sup{ c_k·θ : ‖θ‖ ≤ M̃, θᵀS_kθ ≤ r }`
//! over draws, with `S_k` the (uncentred) empirical second-moment matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graphdep::FractionalCover;
use crate::rng::stream;

const PSD_TOL: f64 = 1e-10;

/// Second-moment matrix of one task, kept in eigen-coordinates.
#[derive(Debug, Clone)]
pub struct TaskGeometry {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl TaskGeometry {
    pub fn new(second_moment: &DMatrix<f64>) -> Result<Self> {
        let (r, c) = second_moment.shape();
        if r != c {
            return Err(Error::Invariant(format!("second-moment matrix is {r}x{c}")));
        }
        let scale = second_moment.amax().max(1.0);
        if (second_moment - second_moment.transpose()).amax() > PSD_TOL * scale {
            return Err(Error::Invariant("second-moment matrix is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(second_moment.clone());
        let top = eig.eigenvalues.amax();
        if eig.eigenvalues.iter().any(|&l| l < -PSD_TOL * top.max(1.0)) {
            return Err(Error::Invariant("second-moment matrix is not positive semidefinite".into()));
        }
        // Eigenvalues below the noise floor are treated as exact zeros.
        let floor = 1e-12 * top;
        let eigenvalues = eig.eigenvalues.iter().map(|&l| if l <= floor { 0.0 } else { l }).collect();
        Ok(Self { eigenvalues, eigenvectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max{c·θ : ‖θ‖₂ ≤ norm_bound, θᵀSθ ≤ radius}`.
    ///
    /// Stationary points have the form `θ ∝ (I + αS)⁻¹c`; the ratio
    /// `ρ(α) = ‖θ‖_S² / ‖θ‖²` decreases in `α`, so the multiplier ratio at
    /// which both constraints bind is found by bisection on `ρ(α) = r/M̃²`.
    pub fn sup(&self, c: &DVector<f64>, norm_bound: f64, radius: Option<f64>) -> f64 {
        let coords = self.eigenvectors.tr_mul(c);
        let c2: Vec<f64> = coords.iter().map(|x| x * x).collect();
        let total: f64 = c2.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let ball = norm_bound * total.sqrt();
        let Some(r) = radius else { return ball };
        let lam = &self.eigenvalues;
        let target = r / (norm_bound * norm_bound);

        let rho0 = lam.iter().zip(&c2).map(|(l, x)| l * x).sum::<f64>() / total;
        if rho0 <= target {
            return ball;
        }

        // Limit α → ∞: mass in the null space drives ρ to 0; otherwise ρ
        // tends to Σ c²/λ / Σ c²/λ², where the variance constraint alone binds.
        let null_mass: f64 = lam.iter().zip(&c2).filter(|(l, _)| **l == 0.0).map(|(_, x)| x).sum();
        if null_mass <= 1e-300 {
            let s1: f64 = lam.iter().zip(&c2).filter(|(l, _)| **l > 0.0).map(|(l, x)| x / l).sum();
            let s2: f64 = lam.iter().zip(&c2).filter(|(l, _)| **l > 0.0).map(|(l, x)| x / (l * l)).sum();
            if s1 / s2 >= target {
                return (r * s1).sqrt();
            }
        }

        let rho = |alpha: f64| {
            let (mut num, mut den) = (0.0, 0.0);
            for (l, x) in lam.iter().zip(&c2) {
                let d = 1.0 + alpha * l;
                let q = x / (d * d);
                num += l * q;
                den += q;
            }
            num / den
        };
        let top = lam.iter().cloned().fold(0.0, f64::max);
        let mut hi = 1.0 / top;
        while rho(hi) > target {
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if rho(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha = hi;
        let (mut dot, mut norm2, mut snorm2) = (0.0, 0.0, 0.0);
        for (l, x) in lam.iter().zip(&c2) {
            let d = 1.0 + alpha * l;
            dot += x / d;
            norm2 += x / (d * d);
            snorm2 += l * x / (d * d);
        }
        // Scale onto the tighter of the two constraints so the point is feasible.
        let scale = (norm_bound / norm2.sqrt()).min((r / snorm2).sqrt());
        scale * dot
    }
}

/// Norm-bounded linear class `{x ↦ θ_k·x : ‖θ_k‖ ≤ M̃}` per task, optionally
/// localized by `θ_kᵀ S_k θ_k ≤ r`.
#[derive(Debug, Clone)]
pub struct LinearClassSpec {
    pub norm_bound: f64,
    pub radius: Option<f64>,
    tasks: Vec<TaskGeometry>,
}

impl LinearClassSpec {
    pub fn new(second_moments: &[DMatrix<f64>], norm_bound: f64, radius: Option<f64>) -> Result<Self> {
        if !(norm_bound > 0.0) {
            return Err(Error::Invariant(format!("norm bound must be positive, got {norm_bound}")));
        }
        if let Some(r) = radius {
            if !(r > 0.0) {
                return Err(Error::Domain(format!("variance radius must be positive, got {r}")));
            }
        }
        let tasks = second_moments.iter().map(TaskGeometry::new).collect::<Result<Vec<_>>>()?;
        if let Some(d) = tasks.first().map(TaskGeometry::dim) {
            if tasks.iter().any(|t| t.dim() != d) {
                return Err(Error::Structural("tasks have different feature dimensions".into()));
            }
        }
        Ok(Self { norm_bound, radius, tasks })
    }

    /// Spec whose second moments are computed from the task data.
    pub fn from_tasks(tasks: &[LfrcTask], norm_bound: f64, radius: Option<f64>) -> Result<Self> {
        let moments: Vec<_> = tasks.iter().map(LfrcTask::second_moment).collect();
        Self::new(&moments, norm_bound, radius)
    }

    pub fn with_bounds(&self, norm_bound: f64, radius: Option<f64>) -> Result<Self> {
        if !(norm_bound > 0.0) || radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Domain("norm bound and radius must be positive".into()));
        }
        Ok(Self { norm_bound, radius, tasks: self.tasks.clone() })
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn dim(&self) -> usize {
        self.tasks.first().map_or(0, TaskGeometry::dim)
    }
}

/// `Σ_k max{c_k·θ : ‖θ‖ ≤ M̃, θᵀS_kθ ≤ r}`.
pub fn sup_linear(c: &[DVector<f64>], spec: &LinearClassSpec) -> Result<f64> {
    if c.len() != spec.tasks.len() {
        return Err(Error::Structural(format!("{} aggregates for {} tasks", c.len(), spec.tasks.len())));
    }
    let mut total = 0.0;
    for (ck, geom) in c.iter().zip(&spec.tasks) {
        if ck.len() != geom.dim() {
            return Err(Error::Structural(format!("aggregate has dim {}, class has {}", ck.len(), geom.dim())));
        }
        total += geom.sup(ck, spec.norm_bound, spec.radius);
    }
    Ok(total)
}

/// One task's data for the estimator.
#[derive(Debug, Clone)]
pub enum LfrcTask {
    /// Rows of `samples` are the `x_i`; the cover spans the rows.
    Samples { samples: DMatrix<f64>, cover: FractionalCover },
    /// Pair task of a bipartite ranking problem: `x_pq = x⁺_p − x⁻_q`,
    /// covered by the equitable unit-weight cover (never materialized).
    Pairs { positives: DMatrix<f64>, negatives: DMatrix<f64> },
}

impl LfrcTask {
    pub fn n_samples(&self) -> usize {
        match self {
            LfrcTask::Samples { samples, .. } => samples.nrows(),
            LfrcTask::Pairs { positives, negatives } => positives.nrows() * negatives.nrows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LfrcTask::Samples { samples, .. } => samples.ncols(),
            LfrcTask::Pairs { positives, .. } => positives.ncols(),
        }
    }

    fn validate(&self) -> Result<Vec<f64>> {
        match self {
            LfrcTask::Samples { samples, cover } => {
                if cover.n_vertices() != samples.nrows() {
                    return Err(Error::Structural(format!(
                        "cover spans {} vertices but task has {} samples",
                        cover.n_vertices(),
                        samples.nrows()
                    )));
                }
                let weights = cover.vertex_weights();
                if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| (**w - 1.0).abs() > 1e-12) {
                    return Err(Error::Structural(format!("sample {i} is covered with total weight {w}")));
                }
                Ok(weights)
            }
            LfrcTask::Pairs { positives, negatives } => {
                if positives.nrows() == 0 || negatives.nrows() == 0 {
                    return Err(Error::Structural("pair task needs positives and negatives".into()));
                }
                if positives.ncols() != negatives.ncols() {
                    return Err(Error::Structural("positive and negative rows differ in dimension".into()));
                }
                Ok(Vec::new())
            }
        }
    }

    /// `(1/m) Σ_i x_i x_iᵀ`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        match self {
            LfrcTask::Samples { samples, .. } => {
                let m = samples.nrows().max(1) as f64;
                samples.tr_mul(samples) / m
            }
            LfrcTask::Pairs { positives, negatives } => {
                let (np, nn) = (positives.nrows() as f64, negatives.nrows() as f64);
                let mp = positives.row_sum().transpose() / np;
                let mn = negatives.row_sum().transpose() / nn;
                let cross = &mp * mn.transpose();
                positives.tr_mul(positives) / np + negatives.tr_mul(negatives) / nn - &cross - cross.transpose()
            }
        }
    }

    /// Aggregate `c_k` for one draw of signs from `rng`.
    fn aggregate<R: Rng>(&self, weights: &[f64], rng: &mut R) -> DVector<f64> {
        match self {
            LfrcTask::Samples { samples, .. } => {
                let m = samples.nrows() as f64;
                let mut c = DVector::zeros(samples.ncols());
                for (i, row) in samples.row_iter().enumerate() {
                    let s = if rng.gen::<bool>() { weights[i] } else { -weights[i] };
                    c.axpy(s / m, &row.transpose(), 1.0);
                }
                c
            }
            LfrcTask::Pairs { positives, negatives } => {
                // Σ_pq ζ_pq (x_p − x_q) = Σ_p (Σ_q ζ_pq) x_p − Σ_q (Σ_p ζ_pq) x_q
                let (np, nn) = (positives.nrows(), negatives.nrows());
                let mut row_sums = vec![0.0; np];
                let mut col_sums = vec![0.0; nn];
                for rs in row_sums.iter_mut() {
                    for cs in col_sums.iter_mut() {
                        let z = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        *rs += z;
                        *cs += z;
                    }
                }
                let m = (np * nn) as f64;
                let mut c = DVector::zeros(positives.ncols());
                for (p, row) in positives.row_iter().enumerate() {
                    c.axpy(row_sums[p] / m, &row.transpose(), 1.0);
                }
                for (q, row) in negatives.row_iter().enumerate() {
                    c.axpy(-col_sums[q] / m, &row.transpose(), 1.0);
                }
                c
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfrcEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_draws: usize,
}

/// Monte Carlo estimate of the empirical LFRC. Draw `d` uses RNG stream `d`
/// of `seed`, so estimates for different `(M̃, r)` share the same signs.
pub fn estimate_lfrc(
    tasks: &[LfrcTask],
    spec: &LinearClassSpec,
    n_draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<LfrcEstimate> {
    if n_draws == 0 {
        return Err(Error::Domain("n_draws must be ≥ 1".into()));
    }
    if tasks.len() != spec.n_tasks() || tasks.is_empty() {
        return Err(Error::Structural(format!("{} tasks for a class over {} tasks", tasks.len(), spec.n_tasks())));
    }
    let weights = tasks.iter().map(LfrcTask::validate).collect::<Result<Vec<_>>>()?;
    if tasks.iter().any(|t| t.dim() != spec.dim()) {
        return Err(Error::Structural("task dimension does not match the class".into()));
    }
    let k = tasks.len() as f64;
    let draws = exec.try_map(n_draws, |d| {
        let mut rng = stream(seed, d as u64);
        let c: Vec<DVector<f64>> = tasks.iter().zip(&weights).map(|(t, w)| t.aggregate(w, &mut rng)).collect();
        sup_linear(&c, spec).map(|s| s / k)
    })?;
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let stderr = if draws.len() > 1 {
        (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(LfrcEstimate { estimate: mean, stderr, n_draws })
}

/// A candidate sub-root function `Φ` with an upper search limit.
pub struct SubRootHandle {
    phi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub r_hi: f64,
}

impl std::fmt::Debug for SubRootHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubRootHandle").field("r_hi", &self.r_hi).finish_non_exhaustive()
    }
}

/// Points of the log-spaced grid used by [`SubRootHandle::check_grid`].
pub const GRID_POINTS: usize = 241;

impl SubRootHandle {
    pub fn new(phi: impl Fn(f64) -> f64 + Send + Sync + 'static, r_hi: f64) -> Self {
        Self { phi: Box::new(phi), r_hi }
    }

    /// `Φ(r) = a√r + b`.
    pub fn affine_sqrt(a: f64, b: f64, r_hi: f64) -> Self {
        Self::new(move |r| a * r.sqrt() + b, r_hi)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.phi)(r)
    }

    /// Checks on a log grid over `[r_hi·1e−12, r_hi]` that `Φ ≥ 0`, `Φ` is
    /// nondecreasing and `Φ(r)/√r` is nonincreasing.
    pub fn check_grid(&self) -> Result<()> {
        if !(self.r_hi > 0.0) || !self.r_hi.is_finite() {
            return Err(Error::Precondition(format!("r_hi must be positive and finite, got {}", self.r_hi)));
        }
        let lo = self.r_hi * 1e-12;
        let step = (self.r_hi / lo).ln() / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo * (step * i as f64).exp()).collect();
        let vals: Vec<f64> = grid.iter().map(|&r| self.eval(r)).collect();
        let tol = |x: f64| 1e-12 * x.abs().max(1e-300);
        if vals.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Precondition("Φ must be finite and nonnegative".into()));
        }
        if vals.iter().all(|&v| v == 0.0) {
            return Err(Error::Precondition("Φ is identically zero on the grid".into()));
        }
        for i in 1..GRID_POINTS {
            if vals[i] < vals[i - 1] - tol(vals[i - 1]) {
                return Err(Error::Precondition(format!("Φ decreases near r = {}", grid[i])));
            }
            let (a, b) = (vals[i - 1] / grid[i - 1].sqrt(), vals[i] / grid[i].sqrt());
            if b > a + tol(a) {
                return Err(Error::Precondition(format!("Φ(r)/√r increases near r = {}", grid[i])));
            }
        }
        Ok(())
    }
}

/// Default relative tolerance for [`fixed_point`].
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Positive fixed point `r* = Φ(r*)` of a sub-root function.
///
/// `Φ(r) > r` exactly below `r*`, so after halving down from `r_hi` to find
/// a point with `Φ(r) > r`, bisection on the sign of `Φ(r) − r` converges
/// to `r*`. Stops once `|Φ(r) − r| ≤ tol·max(1, r)`.
pub fn fixed_point(phi: &SubRootHandle, tol: f64) -> Result<f64> {
    phi.check_grid()?;
    let g = |r: f64| phi.eval(r) - r;
    let mut hi = phi.r_hi;
    if g(hi) > 0.0 {
        return Err(Error::Bracketing(format!("Φ(r) > r at r_hi = {hi}; raise r_hi")));
    }
    let accept = |r: f64| g(r).abs() <= tol * r.max(1.0);
    if accept(hi) {
        return Ok(hi);
    }
    let mut lo = hi;
    while g(lo) <= 0.0 {
        if accept(lo) {
            return Ok(lo);
        }
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Bracketing("no sign change of Φ(r) − r within [1e-300, r_hi]".into()));
        }
    }
    for _ in 0..2000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if accept(mid) {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
