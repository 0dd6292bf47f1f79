//! Independent reference implementations shared by integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// `max{c·θ : ‖θ‖ ≤ m, θᵀSθ ≤ r}` through its Lagrangian dual
///
/// ```text
/// min_{s∈[0,1]} √( cᵀ((1−s)I + sS)⁻¹c · ((1−s)m² + s r) )
/// ```
///
/// which is quasiconvex in `s`, so a dense scan followed by golden-section
/// refinement finds the minimum.
pub fn sup_dual(c: &DVector<f64>, s_mat: &DMatrix<f64>, m: f64, r: f64) -> f64 {
    let n = c.len();
    let h = |s: f64| -> f64 {
        let a = DMatrix::identity(n, n) * (1.0 - s) + s_mat * s;
        match a.lu().solve(c) {
            Some(x) => {
                let q = c.dot(&x);
                if q.is_finite() && q >= 0.0 {
                    (q * ((1.0 - s) * m * m + s * r)).sqrt()
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    };
    let grid: usize = 4000;
    let mut best = (0, h(0.0));
    for i in 1..=grid {
        let v = h(i as f64 / grid as f64);
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut lo = (best.0.saturating_sub(1)) as f64 / grid as f64;
    let mut hi = ((best.0 + 1).min(grid)) as f64 / grid as f64;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if h(a) <= h(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.1.min(h(0.5 * (lo + hi)))
}

/// `E_ζ max_{‖θ‖≤m} c(ζ)·θ = m E‖c(ζ)‖` by enumerating all sign vectors
/// for a single task with a unit-weight single-class cover.
pub fn exact_unlocalized(samples: &DMatrix<f64>, m: f64) -> f64 {
    let n = samples.nrows();
    assert!(n <= 16);
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let mut c = DVector::zeros(samples.ncols());
        for i in 0..n {
            let s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            c += samples.row(i).transpose() * (s / n as f64);
        }
        total += m * c.norm();
    }
    total / (1u64 << n) as f64
}

/// Deterministic pseudo-random PSD matrix `AᵀA / rows` with some rank
/// deficiency when `rows < dim`.
pub fn random_psd(dim: usize, rows: usize, seed: u64) -> DMatrix<f64> {
    let a = random_matrix(rows, dim, seed);
    a.tr_mul(&a) / rows as f64
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    DMatrix::from_fn(rows, cols, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    })
}

pub fn random_vector(n: usize, seed: u64) -> DVector<f64> {
    random_matrix(n, 1, seed).column(0).into_owned()
}

/// Characteristic polynomial coefficients by Faddeev–LeVerrier:
/// `det(λI − A) = Σ_i coef[i] λ^(n−i)`.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coef = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * coef[k - 1];
        let ck = -(a * &m).trace() / k as f64;
        coef.push(ck);
    }
    coef
}

fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Real roots of the characteristic polynomial of a symmetric matrix with
/// distinct eigenvalues, by sign-change scanning and bisection; descending.
pub fn char_poly_roots(a: &DMatrix<f64>) -> Vec<f64> {
    let coef = char_poly(a);
    let bound = a.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut prev_x = -bound;
    let mut prev = horner(&coef, prev_x);
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let fx = horner(&coef, x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && prev.signum() != fx.signum() {
            let (mut lo, mut hi, flo) = (prev_x, x, prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if horner(&coef, mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev = fx;
    }
    roots.reverse();
    roots
}

/// `min_d (d·a + w·√(a · Σ_{l>d} λ_l))` by direct summation per cut.
pub fn brute_force_cut(lambda: &[f64], a: f64, w: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for d in 0..=lambda.len() {
        let tail: f64 = lambda[d..].iter().sum();
        let v = d as f64 * a + w * (a * tail).sqrt();
        if v < best.1 {
            best = (d, v);
        }
    }
    best
}
