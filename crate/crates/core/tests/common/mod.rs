//! Independent reference implementations used only by the integration tests.
//!
//! Nothing here calls into the solver. The forward recursion is rewritten from
//! the optimality conditions in the naive (non-rationalized) form, and the
//! multiplier is located by exhaustive search over a log-spaced grid followed
//! by bisection inside the winning cell.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub alpha: Vec<f64>,
    pub sigma_w2: Vec<f64>,
    pub sigma_x1_2: f64,
    pub d_target: f64,
}

/// Reference schedule for multiplier `theta`: returns `(D, lambda)`.
pub fn reference_forward(inst: &Instance, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let n = inst.alpha.len();
    let mut d = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut lam = inst.sigma_x1_2;
    for t in 0..n {
        let candidate = if theta == 0.0 {
            f64::INFINITY
        } else if t + 1 == n {
            1.0 / (2.0 * theta)
        } else {
            let b2 = inst.alpha[t] * inst.alpha[t] / inst.sigma_w2[t];
            let x = 2.0 * b2 / theta;
            if b2 == 0.0 {
                1.0 / (2.0 * theta)
            } else if x < 1e-4 {
                // series of (sqrt(1 + x) - 1) / x, exact to O(x^4)
                x / (2.0 * b2) * (0.5 - x / 8.0 + x * x / 16.0 - 5.0 * x * x * x / 128.0)
            } else {
                ((1.0 + x).sqrt() - 1.0) / (2.0 * b2)
            }
        };
        let dt = if candidate < lam { candidate } else { lam };
        d.push(dt);
        lambda.push(lam);
        if t + 1 < n {
            lam = inst.alpha[t] * inst.alpha[t] * dt + inst.sigma_w2[t];
        }
    }
    (d, lambda)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Grid search for the smallest-rate multiplier meeting the budget.
///
/// Scans `grid` log-spaced values of `theta` over twelve decades around
/// `1/(2D)`, keeps the first cell where the mean distortion crosses the
/// budget, then bisects inside that cell. Returns `(theta, D, lambda)`.
pub fn grid_oracle(inst: &Instance, grid: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let (d0, l0) = reference_forward(inst, 0.0);
    if mean(&d0) <= inst.d_target {
        return (0.0, d0, l0);
    }
    let top = (0.5 / inst.d_target).ln();
    let bottom = top - 12.0 * std::f64::consts::LN_10;
    let at = |k: usize| (bottom + (top - bottom) * k as f64 / (grid - 1) as f64).exp();
    // mean distortion is non-increasing in theta; find the first grid point within budget
    let mut hi_k = None;
    for k in 0..grid {
        let (d, _) = reference_forward(inst, at(k));
        if mean(&d) <= inst.d_target {
            hi_k = Some(k);
            break;
        }
    }
    let hi_k = hi_k.expect("theta = 1/(2D) meets the budget");
    if hi_k == 0 {
        let (d, l) = reference_forward(inst, at(0));
        return (at(0), d, l);
    }
    let (mut lo, mut hi) = (at(hi_k - 1), at(hi_k));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (d, _) = reference_forward(inst, mid);
        if mean(&d) > inst.d_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (d, l) = reference_forward(inst, hi);
    (hi, d, l)
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    Instance {
        alpha: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        sigma_w2: (0..n).map(|_| rng.random_range(0.1..2.0)).collect(),
        sigma_x1_2: rng.random_range(0.1..2.0),
        d_target: rng.random_range(0.05..1.5),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sum_t max(0, 1/2 log2(lambda_t / D_t))` for two steps with
/// `alpha = sigma_w2 = sigma_x1_2 = 1`, minimized over `D_1` on a uniform grid
/// with `D_2 = 2 D - D_1`.
pub fn brute_force_two_step(d_target: f64, grid: usize) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for k in 1..grid {
        let d1 = (2.0 * d_target).min(1.0) * k as f64 / grid as f64;
        let d2 = 2.0 * d_target - d1;
        if d2 <= 0.0 {
            continue;
        }
        let lam2 = d1 + 1.0;
        let d2 = d2.min(lam2);
        let rate = (0.5 * (1.0 / d1).log2()).max(0.0) + (0.5 * (lam2 / d2).log2()).max(0.0);
        if rate < best.0 {
            best = (rate, d1, d2);
        }
    }
    best
}
