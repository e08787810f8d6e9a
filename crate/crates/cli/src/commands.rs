use gmbounds_core::lattice::{steady_upper, upper_rates, PrefixCost};
use gmbounds_core::lqg::{infeasible_steps, steady_state_riccati};
use gmbounds_core::simulator::{simulate_control, simulate_estimation, verify, verify_control, Verdict};
use gmbounds_core::waterfill::{solve, stability_floor, steady_state_rate};
use gmbounds_core::{
    lqg_bounds, riccati, steady_state_cost, Error as CoreError, LatticeSpec, Schedule, SimMode, SimReport,
    TimeInvariantPlant,
};
use serde::Serialize;

use crate::config::{Config, SweepParam};
use crate::error::CliError;
use crate::format::{num, round9, row};

/// What a command produced. `failure` is reported after the document has
/// been written.
pub struct Output {
    pub body: String,
    pub notes: Vec<String>,
    pub failure: Option<CliError>,
    pub histograms: Option<String>,
}

impl Output {
    fn ok(body: String, notes: Vec<String>) -> Self {
        Output {
            body,
            notes,
            failure: None,
            histograms: None,
        }
    }
}

pub struct Options {
    pub prefix: PrefixCost,
}

fn schedule_of(cfg: &Config, model: &gmbounds_core::SourceModel) -> Result<Schedule, CliError> {
    Ok(solve(model, cfg.d_target()?, cfg.eps())?)
}

fn schedule_notes(s: &Schedule) -> Vec<String> {
    vec![format!(
        "theta = {}, iterations = {}, residual = {}, zero_rate = {}, mean D = {}, total R = {}",
        num(s.theta),
        s.iterations,
        s.residual.map_or("n/a".into(), num),
        s.zero_rate,
        num(s.mean_distortion()),
        num(s.total_rate())
    )]
}

pub fn waterfill(cfg: &Config) -> Result<Output, CliError> {
    let model = cfg.source()?;
    let s = schedule_of(cfg, &model)?;
    let mut body = String::from("t,lambda,D,R\n");
    for i in 0..s.n() {
        body.push_str(&row([(i + 1).to_string(), num(s.lambda[i]), num(s.d[i]), num(s.r[i])]));
    }
    Ok(Output::ok(body, schedule_notes(&s)))
}

fn lattice_column(spec: &LatticeSpec) -> String {
    format!("R_upper_{}", spec.mode.name())
}

pub fn bounds(cfg: &Config, opts: &Options) -> Result<Output, CliError> {
    let model = cfg.source()?;
    let s = schedule_of(cfg, &model)?;
    let lattices = cfg.lattices()?;
    let uppers = lattices
        .iter()
        .map(|l| upper_rates(&s, l, opts.prefix))
        .collect::<Result<Vec<_>, _>>()?;

    let mut body = row(["t".to_string(), "R_lower".to_string()]
        .into_iter()
        .chain(lattices.iter().map(lattice_column)));
    for i in 0..s.n() {
        body.push_str(&row([(i + 1).to_string(), num(s.r[i])]
            .into_iter()
            .chain(uppers.iter().map(|u| num(u[i])))));
    }
    let n = s.n() as f64;
    let gaps: Vec<f64> = uppers
        .iter()
        .map(|u| u.iter().zip(&s.r).map(|(a, b)| a - b).sum::<f64>() / n)
        .collect();
    body.push_str(&row(["mean_gap".to_string(), String::new()]
        .into_iter()
        .chain(gaps.iter().map(|&g| num(g)))));
    let mut notes = schedule_notes(&s);
    for (l, g) in lattices.iter().zip(&gaps) {
        notes.push(format!("{} (p = {}, G = {}): mean gap {} bits/dimension", l.mode, l.p, num(l.g), num(*g)));
    }
    Ok(Output::ok(body, notes))
}

fn single_lattice(cfg: &Config) -> Result<LatticeSpec, CliError> {
    let mut lattices = cfg.lattices()?;
    if lattices.len() != 1 {
        return Err(CliError::Usage(format!(
            "this command takes exactly one lattice, got {}",
            lattices.len()
        )));
    }
    Ok(lattices.remove(0))
}

pub fn lqg(cfg: &Config, opts: &Options) -> Result<Output, CliError> {
    let cm = cfg.control()?;
    let s = schedule_of(cfg, &cm.source)?;
    let lattice = single_lattice(cfg)?;
    let ric = riccati(&cm)?;
    let bad = infeasible_steps(&cm, &ric, &s.r);
    if !bad.is_empty() {
        let list: Vec<String> = bad
            .iter()
            .map(|(t, r, f)| format!("t = {t}: R = {} bits, floor = {} bits", num(*r), num(*f)))
            .collect();
        return Err(CliError::Infeasible(format!(
            "{} step(s) at or below the stability floor log2|alpha_t|: {}",
            bad.len(),
            list.join("; ")
        )));
    }
    let sol = lqg_bounds(&cm, &s.r, &lattice, opts.prefix)?;
    let mut body = String::from("t,K,L,R,cost_lower,cost_upper,rate_cost,floor,upper_feasible\n");
    let n = cm.n();
    for i in 0..n {
        body.push_str(&row([
            (i + 1).to_string(),
            num(sol.k[i]),
            num(sol.l[i]),
            num(s.r[i]),
            num(sol.cost_lower[i]),
            num(sol.cost_upper[i]),
            num(sol.rate_cost[i]),
            num(stability_floor(cm.source.alpha[i])),
            sol.cost_upper[i].is_finite().to_string(),
        ]));
    }
    let blanks = || String::new();
    body.push_str(&row([
        "total".to_string(),
        blanks(),
        blanks(),
        num(s.total_rate()),
        num(sol.total_lower()),
        num(sol.total_upper()),
        blanks(),
        blanks(),
        sol.cost_upper.iter().all(|c| c.is_finite()).to_string(),
    ]));
    let mut notes = schedule_notes(&s);
    let upper_bad: Vec<usize> = (1..=n).filter(|&t| !sol.cost_upper[t - 1].is_finite()).collect();
    if let (Some(first), Some(last)) = (upper_bad.first(), upper_bad.last()) {
        notes.push(format!(
            "{} lattice: upper bound undefined at {} step(s), t = {first}..={last} (inflated floor exceeds the rate)",
            lattice.mode,
            upper_bad.len()
        ));
    }
    Ok(Output::ok(body, notes))
}

#[derive(Serialize)]
struct ScheduleView {
    #[serde(rename = "D")]
    d: Vec<f64>,
    lambda: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<f64>,
}

#[derive(Serialize)]
struct SimulationDocument {
    passed: bool,
    schedule: ScheduleView,
    report: SimReport,
    verdict: Vec<Verdict>,
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| round9(x)).collect()
}

fn rounded(mut r: SimReport) -> SimReport {
    r.emp_d = round_all(&r.emp_d);
    r.ci_halfwidth = round_all(&r.ci_halfwidth);
    r.innovation_var = round_all(&r.innovation_var);
    r.innovation_std_error = round_all(&r.innovation_std_error);
    r.emp_h = r.emp_h.as_deref().map(round_all);
    r.emp_h_marginal = r.emp_h_marginal.as_deref().map(round_all);
    r.emp_cost = r.emp_cost.map(round9);
    r.cost_std_error = r.cost_std_error.map(round9);
    r
}

pub fn simulate(cfg: &Config) -> Result<Output, CliError> {
    let trials = cfg.trials.ok_or_else(|| CliError::Config("missing key `trials`".into()))?;
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let seed = cfg.seed.ok_or_else(|| CliError::Config("missing key `seed`".into()))?;
    let mode = cfg.mode.unwrap_or(SimMode::GaussianTestChannel);
    let (report, verdicts, schedule) = if cfg.control.unwrap_or(false) {
        let cm = cfg.control()?;
        let s = schedule_of(cfg, &cm.source)?;
        let report = simulate_control(&cm, &s, mode, trials, seed)?;
        let mut verdicts = verify(&report, &s);
        verdicts.push(verify_control(&report, &cm)?);
        (report, verdicts, s)
    } else {
        let model = cfg.source()?;
        let s = schedule_of(cfg, &model)?;
        let report = simulate_estimation(&model, &s, mode, trials, seed)?;
        let verdicts = verify(&report, &s);
        (report, verdicts, s)
    };
    let passed = verdicts.iter().all(|v| v.passed);
    let histograms = (mode == SimMode::ScalarEcdq).then(|| report.histogram_csv());
    let failed: Vec<String> = verdicts.iter().filter(|v| !v.passed).map(|v| v.check.clone()).collect();
    let notes = verdicts
        .iter()
        .map(|v| format!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.check, v.detail))
        .collect();
    let doc = SimulationDocument {
        passed,
        schedule: ScheduleView {
            d: round_all(&schedule.d),
            lambda: round_all(&schedule.lambda),
            r: round_all(&schedule.r),
        },
        report: rounded(report),
        verdict: verdicts,
    };
    let body = toml::to_string(&doc).map_err(|e| CliError::Core(CoreError::Serialization(e.to_string())))?;
    Ok(Output {
        body,
        notes,
        failure: (!passed).then(|| CliError::Statistical(failed.join(", "))),
        histograms,
    })
}

fn or_inf(v: Result<f64, CoreError>) -> Result<f64, CliError> {
    match v {
        Ok(x) => Ok(x),
        Err(CoreError::BelowStabilityFloor { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

pub fn sweep(cfg: &Config, opts: &Options) -> Result<Output, CliError> {
    let param = cfg
        .sweep_param
        .ok_or_else(|| CliError::Config("missing key `sweep_param`".into()))?;
    let grid = cfg.sweep_grid()?;
    let lattices = cfg.lattices()?;
    let alpha = cfg.time_invariant_alpha()?;
    let sigma_w2 = cfg.scalar(&cfg.sigma_w2, "sigma_w2")?;
    let mut body = String::new();
    match param {
        SweepParam::D => {
            body.push_str(&row(["D".to_string(), "R_lower".to_string()]
                .into_iter()
                .chain(lattices.iter().map(lattice_column))));
            for &d in &grid {
                let lower = steady_state_rate(alpha, sigma_w2, d)?;
                let mut cells = vec![num(d), num(lower)];
                for l in &lattices {
                    cells.push(num(steady_upper(alpha, sigma_w2, d, l, opts.prefix)?));
                }
                body.push_str(&row(cells));
            }
        }
        SweepParam::RInf => {
            let plant = TimeInvariantPlant {
                alpha,
                beta: cfg.scalar(&cfg.beta, "beta")?,
                q: cfg.scalar(&cfg.q, "Q")?,
                n_penalty: cfg.scalar(&cfg.n_penalty, "N")?,
                sigma_w2,
            };
            let k = steady_state_riccati(&plant);
            let l = plant.alpha * plant.beta * k / (plant.beta * plant.beta * k + plant.n_penalty);
            body.push_str(&row(["R_inf", "K", "L", "cost_lower"]
                .into_iter()
                .map(String::from)
                .chain(lattices.iter().map(|s| format!("cost_upper_{}", s.mode.name())))));
            let inflations = lattices
                .iter()
                .map(|s| s.inflation(opts.prefix))
                .collect::<Result<Vec<_>, _>>()?;
            for &r in &grid {
                let mut cells = vec![num(r), num(k), num(l), num(or_inf(steady_state_cost(&plant, r, 1.0))?)];
                for &c in &inflations {
                    cells.push(num(or_inf(steady_state_cost(&plant, r, c))?));
                }
                body.push_str(&row(cells));
            }
        }
    }
    Ok(Output::ok(body, vec![format!("{} grid points", grid.len())]))
}
