//! Monte-Carlo validation of the analytical bounds.
//!
//! The source (or controlled plant) is run through a DPCM loop: the encoder
//! subtracts the decoder's prediction and codes the innovation; the decoder
//! adds the prediction back. Two innovation coders are available:
//!
//! * the Gaussian test channel `y_hat = h x_hat + sqrt(h) v`, `v ~ N(0, D_t)`,
//!   `h = 1 - D_t / lambda_t`, which attains `D_t` exactly;
//! * a scalar subtractive-dither ECDQ with step `Delta_t = sqrt(12 D_t)`: the
//!   encoder sends `k = round((sqrt(h) x_hat + z) / Delta)`, the decoder forms
//!   `y_hat = sqrt(h) (k Delta - z)`.
//!
//! Steps with `h = 0` send nothing and the decoder keeps the prediction.
//! Trials draw from independent ChaCha streams seeded by
//! [`stats::trial_seed`]; per-trial results are reduced in trial order with
//! compensated sums, so reports are bit-identical for a given seed
//! regardless of thread count.

pub mod entropy;
pub mod stats;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ecdq_gap, PrefixCost, G_SCALAR};
use crate::lqg::{riccati, Riccati};
use crate::model::{to_toml, ControlModel, Schedule, SourceModel};

pub use entropy::{empirical_entropy, entropy_of_counts, IndexHistogram};
use stats::{mean_and_std_error, trial_seed, CompensatedSum};

/// Innovation coder used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    GaussianTestChannel,
    ScalarEcdq,
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian-test-channel" | "gaussian" => Ok(SimMode::GaussianTestChannel),
            "scalar-ecdq" | "ecdq" => Ok(SimMode::ScalarEcdq),
            other => Err(format!(
                "unknown simulation mode `{other}` (expected gaussian-test-channel or scalar-ecdq)"
            )),
        }
    }
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Slack on the entropy sandwich, in bits.
pub const ENTROPY_SLACK: f64 = 0.1;

const BLOCK: usize = 2048;

/// Empirical counterparts of the analytical quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mode: SimMode,
    pub trials: usize,
    pub seed: u64,
    pub p: usize,
    /// Per-step MSE per dimension.
    #[serde(rename = "emp_D")]
    pub emp_d: Vec<f64>,
    /// 95% confidence half-widths on `emp_D`.
    pub ci_halfwidth: Vec<f64>,
    /// Sample second moment of the encoder innovation.
    pub innovation_var: Vec<f64>,
    pub innovation_std_error: Vec<f64>,
    /// Index entropy given the dither phase, bits per dimension (ECDQ only).
    #[serde(rename = "emp_H", default, skip_serializing_if = "Option::is_none")]
    pub emp_h: Option<Vec<f64>>,
    /// Index entropy marginalized over the dither (ECDQ only).
    #[serde(rename = "emp_H_marginal", default, skip_serializing_if = "Option::is_none")]
    pub emp_h_marginal: Option<Vec<f64>>,
    /// Average quadratic cost per dimension (control runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_std_error: Option<f64>,
    #[serde(skip)]
    pub histograms: Vec<IndexHistogram>,
}

impl SimReport {
    pub fn to_toml(&self) -> Result<String> {
        to_toml(self)
    }

    /// Raw index counts as CSV (`t,phase_cell,index,count`), ECDQ runs only.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("t,phase_cell,index,count\n");
        for (i, hist) in self.histograms.iter().enumerate() {
            for (cell, counts) in hist.by_phase.iter().enumerate() {
                for (index, count) in counts {
                    let _ = writeln!(out, "{},{},{},{}", i + 1, cell, index, count);
                }
            }
        }
        out
    }
}

/// One named statistical check and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

struct Plan<'a> {
    source: &'a SourceModel,
    schedule: &'a Schedule,
    mode: SimMode,
    control: Option<(&'a ControlModel, Riccati)>,
}

#[derive(Default)]
struct TrialStats {
    err2: Vec<f64>,
    err4: Vec<f64>,
    innov2: Vec<f64>,
    innov4: Vec<f64>,
    cost: f64,
    // (step index, phase cell, quantizer index)
    indices: Vec<(u32, u8, i64)>,
}

impl Plan<'_> {
    fn run_trial(&self, seed: u64) -> TrialStats {
        let model = self.source;
        let n = model.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stats = TrialStats {
            err2: vec![0.0; n],
            err4: vec![0.0; n],
            innov2: vec![0.0; n],
            innov4: vec![0.0; n],
            ..TrialStats::default()
        };
        let mut cost = 0.0;
        for _ in 0..model.p {
            let mut x = model.sigma_x1_2.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let mut y_prev = 0.0;
            let mut u_prev = 0.0;
            for t in 1..=n {
                let i = t - 1;
                let prediction = if t == 1 {
                    0.0
                } else {
                    let beta = self.control.as_ref().map_or(0.0, |(cm, _)| cm.beta[i - 1]);
                    model.alpha[i - 1] * y_prev + beta * u_prev
                };
                let innovation = x - prediction;
                let d = self.schedule.d[i];
                let h = 1.0 - d / self.schedule.lambda[i];
                let coded = if h <= 0.0 {
                    0.0
                } else {
                    match self.mode {
                        SimMode::GaussianTestChannel => {
                            let v = d.sqrt() * rng.sample::<f64, _>(StandardNormal);
                            h * innovation + h.sqrt() * v
                        }
                        SimMode::ScalarEcdq => {
                            let step = (12.0 * d).sqrt();
                            let u: f64 = rng.random();
                            // uniform on (-step/2, step/2]
                            let dither = (0.5 - u) * step;
                            let k = ((h.sqrt() * innovation + dither) / step).round();
                            let cell = ((1.0 - u) * entropy::DITHER_PHASE_CELLS as f64) as usize;
                            let cell = cell.min(entropy::DITHER_PHASE_CELLS - 1);
                            stats.indices.push((i as u32, cell as u8, k as i64));
                            h.sqrt() * (k * step - dither)
                        }
                    }
                };
                let y = coded + prediction;
                let e2 = (x - y) * (x - y);
                stats.err2[i] += e2;
                stats.err4[i] += e2 * e2;
                let i2 = innovation * innovation;
                stats.innov2[i] += i2;
                stats.innov4[i] += i2 * i2;

                let mut u = 0.0;
                let mut beta = 0.0;
                if let Some((cm, ric)) = &self.control {
                    u = -ric.l[i] * y;
                    beta = cm.beta[i];
                    cost += cm.q[i] * x * x;
                    if t < n {
                        cost += cm.n_penalty[i] * u * u;
                    }
                }
                let w = model.sigma_w2[i].sqrt() * rng.sample::<f64, _>(StandardNormal);
                x = model.alpha[i] * x + beta * u + w;
                y_prev = y;
                u_prev = u;
            }
        }
        stats.cost = cost / model.p as f64;
        stats
    }

    fn run(&self, trials: usize, seed: u64) -> SimReport {
        let n = self.source.n;
        let p = self.source.p;
        let mut err2 = vec![CompensatedSum::default(); n];
        let mut err4 = vec![CompensatedSum::default(); n];
        let mut innov2 = vec![CompensatedSum::default(); n];
        let mut innov4 = vec![CompensatedSum::default(); n];
        let mut cost = CompensatedSum::default();
        let mut cost2 = CompensatedSum::default();
        let mut histograms = vec![IndexHistogram::default(); n];

        let mut start = 0;
        while start < trials {
            let end = (start + BLOCK).min(trials);
            let block: Vec<TrialStats> = (start..end)
                .into_par_iter()
                .map(|trial| self.run_trial(trial_seed(seed, trial as u64)))
                .collect();
            for stats in block {
                for i in 0..n {
                    err2[i].add(stats.err2[i]);
                    err4[i].add(stats.err4[i]);
                    innov2[i].add(stats.innov2[i]);
                    innov4[i].add(stats.innov4[i]);
                }
                cost.add(stats.cost);
                cost2.add(stats.cost * stats.cost);
                for (i, cell, k) in stats.indices {
                    histograms[i as usize].record(cell as usize, k);
                }
            }
            start = end;
        }

        let samples = trials * p;
        let (emp_d, ci_halfwidth): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| {
                let (m, se) = mean_and_std_error(err2[i].value(), err4[i].value(), samples);
                (m, Z95 * se)
            })
            .unzip();
        let (innovation_var, innovation_std_error) = (0..n)
            .map(|i| mean_and_std_error(innov2[i].value(), innov4[i].value(), samples))
            .unzip();
        let (emp_h, emp_h_marginal, histograms) = match self.mode {
            SimMode::ScalarEcdq => (
                Some(histograms.iter().map(IndexHistogram::conditional_entropy).collect()),
                Some(histograms.iter().map(IndexHistogram::marginal_entropy).collect()),
                histograms,
            ),
            SimMode::GaussianTestChannel => (None, None, Vec::new()),
        };
        let (emp_cost, cost_std_error) = if self.control.is_some() {
            let (m, se) = mean_and_std_error(cost.value(), cost2.value(), trials);
            (Some(m), Some(se))
        } else {
            (None, None)
        };
        SimReport {
            mode: self.mode,
            trials,
            seed,
            p,
            emp_d,
            ci_halfwidth,
            innovation_var,
            innovation_std_error,
            emp_h,
            emp_h_marginal,
            emp_cost,
            cost_std_error,
            histograms,
        }
    }
}

fn check_inputs(model: &SourceModel, schedule: &Schedule, trials: usize) -> Result<()> {
    model.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument {
            name: "trials",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    schedule.check(model, 1e-9)
}

/// Simulates DPCM state estimation of `model` at the distortions of `schedule`.
pub fn simulate_estimation(
    model: &SourceModel,
    schedule: &Schedule,
    mode: SimMode,
    trials: usize,
    seed: u64,
) -> Result<SimReport> {
    check_inputs(model, schedule, trials)?;
    let plan = Plan {
        source: model,
        schedule,
        mode,
        control: None,
    };
    Ok(plan.run(trials, seed))
}

/// Simulates the closed loop with the certainty-equivalent controller
/// `u_t = -L_t y_t`; the coder subtracts both the state prediction and the
/// previous control effect.
pub fn simulate_control(
    cm: &ControlModel,
    schedule: &Schedule,
    mode: SimMode,
    trials: usize,
    seed: u64,
) -> Result<SimReport> {
    cm.validate()?;
    check_inputs(&cm.source, schedule, trials)?;
    let plan = Plan {
        source: &cm.source,
        schedule,
        mode,
        control: Some((cm, riccati(cm)?)),
    };
    Ok(plan.run(trials, seed))
}

fn worst<I: Iterator<Item = (usize, f64, f64)>>(check: &str, items: I) -> Verdict {
    // items: (step, |deviation|, allowed)
    let mut passed = true;
    let mut worst_ratio = 0.0f64;
    let mut worst_step = 0;
    for (t, dev, allowed) in items {
        let ratio = if allowed > 0.0 { dev / allowed } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
        if !(dev <= allowed) {
            passed = false;
        }
        if !(ratio <= worst_ratio) {
            worst_ratio = ratio;
            worst_step = t;
        }
    }
    Verdict {
        check: check.to_string(),
        passed,
        detail: format!("worst step {worst_step}: deviation / allowance = {worst_ratio:.3}"),
    }
}

/// Statistical checks of a report against its schedule.
///
/// MSE must sit within 3 confidence half-widths of `D_t` and the innovation
/// second moment within 3 standard errors of `lambda_t`. ECDQ runs add the
/// entropy sandwich `R_t^* <= H_t <= R_t^* + gap + slack`.
pub fn verify(report: &SimReport, schedule: &Schedule) -> Vec<Verdict> {
    let n = schedule.n();
    let mut verdicts = vec![
        worst(
            "distortion_within_ci",
            (0..n).map(|i| (i + 1, (report.emp_d[i] - schedule.d[i]).abs(), 3.0 * report.ci_halfwidth[i])),
        ),
        worst(
            "innovation_variance",
            (0..n).map(|i| {
                (
                    i + 1,
                    (report.innovation_var[i] - schedule.lambda[i]).abs(),
                    3.0 * report.innovation_std_error[i],
                )
            }),
        ),
    ];
    if let Some(h) = &report.emp_h {
        let gap = ecdq_gap(1, G_SCALAR, PrefixCost::Omitted).expect("scalar lattice is valid");
        let samples = report.trials * report.p;
        let hi_offset = gap + ENTROPY_SLACK;
        let (mut margin, mut at) = (f64::INFINITY, 0);
        for (i, (&h, &r)) in h.iter().zip(&schedule.r).enumerate() {
            let m = (h - r).min(r + hi_offset - h);
            if !(m >= margin) {
                margin = m;
                at = i + 1;
            }
        }
        let mut v = Verdict {
            check: "entropy_sandwich".into(),
            passed: margin >= 0.0,
            detail: format!("H_t in [R_t, R_t + {hi_offset:.4}]; tightest margin {margin:.4} bits at step {at}"),
        };
        if samples < entropy::MIN_SAMPLES {
            v.passed = false;
            v.detail = format!("{samples} samples per step, need {}", entropy::MIN_SAMPLES);
        }
        verdicts.push(v);
    }
    verdicts
}

/// Closed-loop check: the measured cost agrees within 3 standard errors with
/// the separation decomposition evaluated at the measured distortions.
pub fn verify_control(report: &SimReport, cm: &ControlModel) -> Result<Verdict> {
    let ric = riccati(cm)?;
    let predicted = ric.closed_loop_cost(cm, &report.emp_d)?;
    let (cost, se) = match (report.emp_cost, report.cost_std_error) {
        (Some(c), Some(se)) => (c, se),
        _ => {
            return Err(Error::InvalidArgument {
                name: "report",
                value: f64::NAN,
                reason: "not a control run",
            })
        }
    };
    let dev = (cost - predicted).abs();
    Ok(Verdict {
        check: "cost_decomposition".into(),
        passed: dev <= 3.0 * se,
        detail: format!("empirical {cost:.6} vs decomposition {predicted:.6} (3 SE = {:.6})", 3.0 * se),
    })
}
