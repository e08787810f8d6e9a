//! Dynamic reverse-waterfilling: allocates distortion (and hence rate) across
//! time under an average distortion budget.
//!
//! For a multiplier `theta > 0` each step gets a candidate distortion `xi_t`;
//! the forward pass clamps it at the prediction-error variance `lambda_t`
//! (zero rate) and propagates `lambda_{t+1} = alpha_t^2 D_t + sigma_w_t^2`.
//! The average distortion is non-increasing in `theta`, so the budget is met
//! by bisection on `theta`.

use crate::error::{Error, Result};
use crate::model::{rate_from_variances, Schedule, SourceModel};

/// Default absolute tolerance on `|mean(D_t) - D|`.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Bisection iteration cap.
pub const MAX_ITERATIONS: usize = 200;

// Halvings allowed while searching for the lower end of the bracket; theta
// underflows long before this.
const MAX_BRACKET_STEPS: usize = 2_200;

fn check_step(t: usize, n: usize) -> Result<()> {
    if t == 0 || t > n {
        Err(Error::StepOutOfRange { step: t, n })
    } else {
        Ok(())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "theta",
            value: theta,
            reason: "must be positive and finite",
        })
    }
}

/// Candidate distortion `xi_t` for multiplier `theta` at 1-based step `t`.
///
/// For `t < n`, `xi_t = (sqrt(1 + 2 b_t^2 / theta) - 1) / (2 b_t^2)` with
/// `b_t^2 = alpha_t^2 / sigma_w_t^2`; for `t = n` (and in the `b_t^2 -> 0`
/// limit) it is `1 / (2 theta)`.
pub fn xi(t: usize, theta: f64, model: &SourceModel) -> Result<f64> {
    check_step(t, model.n)?;
    check_theta(theta)?;
    Ok(xi_unchecked(t, theta, model))
}

fn xi_unchecked(t: usize, theta: f64, model: &SourceModel) -> f64 {
    if t == model.n {
        return 0.5 / theta;
    }
    // Rationalized form of (sqrt(1 + x) - 1) / (2 b^2), x = 2 b^2 / theta:
    // avoids cancellation for small x and reduces to 1/(2 theta) at b^2 = 0.
    let x = 2.0 * model.b2(t) / theta;
    1.0 / (theta * ((1.0 + x).sqrt() + 1.0))
}

/// Runs the forward recursion for a fixed multiplier.
pub fn forward_pass(model: &SourceModel, theta: f64) -> Result<Schedule> {
    model.validate()?;
    check_theta(theta)?;
    Ok(forward(model, theta))
}

/// Forward recursion; `theta == 0` is the zero-rate limit (`xi_t = inf`).
fn forward(model: &SourceModel, theta: f64) -> Schedule {
    let n = model.n;
    let mut d = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut lam = model.sigma_x1_2;
    for t in 1..=n {
        let candidate = if theta == 0.0 {
            f64::INFINITY
        } else {
            xi_unchecked(t, theta, model)
        };
        // Ties resolve to the clamped branch (zero rate).
        let dt = if candidate < lam { candidate } else { lam };
        lambda.push(lam);
        d.push(dt);
        r.push(rate_from_variances(lam, dt));
        let a = model.alpha_at(t);
        lam = a * a * dt + model.sigma_w2_at(t);
    }
    Schedule {
        d,
        lambda,
        r,
        theta,
        d_target: None,
        iterations: 0,
        residual: None,
        zero_rate: false,
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn attach_target(mut schedule: Schedule, d_target: f64, iterations: usize) -> Schedule {
    schedule.residual = Some((schedule.mean_distortion() - d_target).abs());
    schedule.d_target = Some(d_target);
    schedule.iterations = iterations;
    schedule
}

/// Finds the multiplier whose schedule meets the average distortion budget
/// `d_target` to within `eps`.
///
/// When the zero-rate schedule (`D_t = lambda_t` everywhere) already satisfies
/// the budget it is returned with `zero_rate` set and `theta = 0`.
pub fn solve(model: &SourceModel, d_target: f64, eps: f64) -> Result<Schedule> {
    model.validate()?;
    if !(d_target > 0.0 && d_target.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "D_target",
            value: d_target,
            reason: "must be positive and finite",
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "eps",
            value: eps,
            reason: "must be positive and finite",
        });
    }

    let zero_rate = forward(model, 0.0);
    if zero_rate.mean_distortion() <= d_target {
        let mut schedule = attach_target(zero_rate, d_target, 0);
        schedule.zero_rate = true;
        return Ok(schedule);
    }

    // xi_t <= 1/(2 theta) for every t, so theta = 1/(2D) always meets the budget.
    let mut hi = 0.5 / d_target;
    let hi_schedule = forward(model, hi);
    let hi_mean = hi_schedule.mean_distortion();
    if (hi_mean - d_target).abs() <= eps {
        return Ok(attach_target(hi_schedule, d_target, 0));
    }
    if hi_mean > d_target {
        return Err(Error::Bracket(format!(
            "mean distortion {hi_mean} exceeds the budget {d_target} at theta = 1/(2D)"
        )));
    }

    let mut lo = hi;
    let mut steps = 0;
    loop {
        lo *= 0.5;
        steps += 1;
        let m = mean(&forward(model, lo).d);
        if (m - d_target).abs() <= eps {
            return Ok(attach_target(forward(model, lo), d_target, 0));
        }
        if m > d_target {
            break;
        }
        if steps >= MAX_BRACKET_STEPS || lo == 0.0 {
            return Err(Error::Bracket(format!(
                "mean distortion stays at or below {d_target} down to theta = {lo:e}"
            )));
        }
    }

    // Invariant: mean(lo) > D >= mean(hi).
    let mut last_residual = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        let schedule = forward(model, mid);
        let m = schedule.mean_distortion();
        last_residual = (m - d_target).abs();
        if last_residual <= eps {
            return Ok(attach_target(schedule, d_target, iteration));
        }
        if m > d_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        theta: 0.5 * (lo + hi),
        residual: last_residual,
    })
}

/// Steady-state rate `max(0, 1/2 log2(alpha^2 + sigma_w^2 / D))` in bits.
pub fn steady_state_rate(alpha: f64, sigma_w2: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "D",
            value: d,
            reason: "must be positive and finite",
        });
    }
    if !(sigma_w2 > 0.0 && sigma_w2.is_finite()) {
        return Err(Error::NonPositiveVariance {
            field: "sigma_w2",
            step: 1,
            value: sigma_w2,
        });
    }
    Ok((0.5 * (alpha * alpha + sigma_w2 / d).log2()).max(0.0))
}

/// Minimum rate `log2|alpha|` below which an unstable step is infeasible
/// (zero for `|alpha| <= 1`).
pub fn stability_floor(alpha: f64) -> f64 {
    alpha.abs().log2().max(0.0)
}

/// Decoupled distortion-rate function used by the LQG bounds:
/// `sigma_w_t^2 / (2^{2R} - alpha_t^2)` for `t < n` and `2^{-2R}` at `t = n`.
pub fn distortion_rate(rate: f64, t: usize, model: &SourceModel) -> Result<f64> {
    check_step(t, model.n)?;
    if !(rate >= 0.0) {
        return Err(Error::InvalidArgument {
            name: "R",
            value: rate,
            reason: "must be non-negative",
        });
    }
    if t == model.n {
        return Ok((-2.0 * rate).exp2());
    }
    let a = model.alpha_at(t);
    let denom = (2.0 * rate).exp2() - a * a;
    if denom <= 0.0 {
        return Err(Error::BelowStabilityFloor {
            step: t,
            rate,
            floor: stability_floor(a),
        });
    }
    Ok(model.sigma_w2_at(t) / denom)
}

/// Average rate of the solved schedule for each horizon in `horizons`, for a
/// time-invariant model; used to watch convergence to [`steady_state_rate`].
pub fn steady_state_schedule_limit(model: &SourceModel, d: f64, horizons: &[usize]) -> Result<Vec<f64>> {
    model.time_invariant_params()?;
    horizons
        .iter()
        .map(|&n| {
            let m = model.with_horizon(n)?;
            Ok(solve(&m, d, DEFAULT_EPS)?.mean_rate())
        })
        .collect()
}
