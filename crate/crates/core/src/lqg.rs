//! Quantized LQG control under the weak separation principle.
//!
//! With fixed predictive coding policies the certainty-equivalent controller
//! `u_t = -L_t y_t` is optimal, and the per-step cost splits into the
//! classical term `sigma_w_t^2 K_t` plus `alpha_t beta_t L_t K_{t+1} D_t`, the
//! price of estimation error. The lower bound plugs the decoupled
//! distortion-rate function into `D_t`; the achievable bound inflates the
//! coding noise by the lattice factor `4^{1/p} (2 pi e G_p)`.
//!
//! All quantities are per dimension.

use crate::error::{Error, Result};
use crate::lattice::PrefixCost;
use crate::model::{ControlModel, LatticeSpec, LqgSolution, TimeInvariantPlant};
use crate::waterfill::{self, stability_floor};

/// Backward Riccati recursion results.
#[derive(Debug, Clone, PartialEq)]
pub struct Riccati {
    /// `K_1 ..= K_{n+1}`, stored 0-based; `k[n] = 0`.
    pub k: Vec<f64>,
    /// `L_1 ..= L_n`.
    pub l: Vec<f64>,
}

/// Runs `K_t = alpha_t^2 K_{t+1} N_t / (beta_t^2 K_{t+1} + N_t) + Q_t` and
/// `L_t = beta_t K_{t+1} alpha_t / (beta_t^2 K_{t+1} + N_t)` backward from
/// `K_{n+1} = 0`.
pub fn riccati(cm: &ControlModel) -> Result<Riccati> {
    cm.validate()?;
    let n = cm.n();
    let mut k = vec![0.0; n + 1];
    let mut l = vec![0.0; n];
    for i in (0..n).rev() {
        let next = k[i + 1];
        let (a, b, q, np) = (cm.source.alpha[i], cm.beta[i], cm.q[i], cm.n_penalty[i]);
        let denom = b * b * next + np;
        // K - K b^2 K / (b^2 K + N) = K N / (b^2 K + N)
        k[i] = a * a * next * np / denom + q;
        l[i] = b * next * a / denom;
    }
    Ok(Riccati { k, l })
}

impl Riccati {
    pub fn n(&self) -> usize {
        self.l.len()
    }

    /// `K_t` for 1-based `t` in `1..=n+1`.
    pub fn k_at(&self, t: usize) -> f64 {
        self.k[t - 1]
    }

    pub fn l_at(&self, t: usize) -> f64 {
        self.l[t - 1]
    }

    /// Weight `alpha_t beta_t L_t K_{t+1}` multiplying the distortion at step `t`.
    pub fn distortion_weight(&self, cm: &ControlModel, t: usize) -> f64 {
        cm.source.alpha_at(t) * cm.beta[t - 1] * self.l_at(t) * self.k_at(t + 1)
    }

    /// Communication-free cost floor `sigma_w_t^2 K_t`.
    pub fn floor(&self, cm: &ControlModel, t: usize) -> f64 {
        cm.source.sigma_w2_at(t) * self.k_at(t)
    }

    /// Per-step lower bounds `LQG_t^* = sigma_w_t^2 K_t + alpha_t beta_t L_t K_{t+1} D(R_t^*)`.
    pub fn cost_lower(&self, cm: &ControlModel, rates: &[f64]) -> Result<Vec<f64>> {
        self.check_rates(rates)?;
        (1..=self.n())
            .map(|t| {
                let weight = self.distortion_weight(cm, t);
                let floor = self.floor(cm, t);
                if weight == 0.0 {
                    return Ok(floor);
                }
                let d = waterfill::distortion_rate(rates[t - 1], t, &cm.source)?;
                Ok(floor + weight * d)
            })
            .collect()
    }

    /// Per-step achievable costs for rates `rates_op` under `lattice`.
    ///
    /// The final step is `sigma_w_n^2 K_n`.
    pub fn cost_upper(
        &self,
        cm: &ControlModel,
        rates_op: &[f64],
        lattice: &LatticeSpec,
        prefix: PrefixCost,
    ) -> Result<Vec<f64>> {
        self.check_rates(rates_op)?;
        lattice.validate()?;
        let inflation = lattice.inflation(prefix)?;
        (1..=self.n())
            .map(|t| self.upper_at(cm, t, rates_op[t - 1], inflation))
            .collect()
    }

    fn upper_at(&self, cm: &ControlModel, t: usize, rate: f64, inflation: f64) -> Result<f64> {
        let weight = self.distortion_weight(cm, t);
        let floor = self.floor(cm, t);
        if t == self.n() || weight == 0.0 {
            return Ok(floor);
        }
        if !(rate >= 0.0) {
            return Err(Error::InvalidArgument {
                name: "R",
                value: rate,
                reason: "must be non-negative",
            });
        }
        let a = cm.source.alpha_at(t);
        let denom = (2.0 * rate).exp2() - inflation * a * a;
        if denom <= 0.0 {
            return Err(Error::BelowStabilityFloor {
                step: t,
                rate,
                floor: 0.5 * (inflation * a * a).log2().max(0.0),
            });
        }
        Ok(floor + weight * inflation * cm.source.sigma_w2_at(t) / denom)
    }

    /// Rate-cost inverse
    /// `R(LQG_t^*) = 1/2 log2(alpha_t^2 + alpha_t beta_t L_t K_{t+1} sigma_w_t^2 / (LQG_t^* - sigma_w_t^2 K_t))`.
    pub fn rate_cost(&self, cm: &ControlModel, lqg_star: f64, t: usize) -> Result<f64> {
        let (weight, excess) = self.rate_cost_terms(cm, lqg_star, t)?;
        let a = cm.source.alpha_at(t);
        Ok(0.5 * (a * a + weight * cm.source.sigma_w2_at(t) / excess).log2())
    }

    /// Same inverse with the gain substituted:
    /// `1/2 [log2 alpha_t^2 + log2(1 + (beta_t^2 K_{t+1}^2 sigma_w_t^2 / (beta_t^2 K_{t+1} + N_t)) / (LQG_t^* - sigma_w_t^2 K_t))]`.
    pub fn rate_cost_substituted(&self, cm: &ControlModel, lqg_star: f64, t: usize) -> Result<f64> {
        let (_, excess) = self.rate_cost_terms(cm, lqg_star, t)?;
        let (a, b, np) = (cm.source.alpha_at(t), cm.beta[t - 1], cm.n_penalty[t - 1]);
        let next = self.k_at(t + 1);
        let gain_term = b * b * next * next * cm.source.sigma_w2_at(t) / (b * b * next + np);
        Ok(0.5 * ((a * a).log2() + (1.0 + gain_term / excess).log2()))
    }

    fn rate_cost_terms(&self, cm: &ControlModel, lqg_star: f64, t: usize) -> Result<(f64, f64)> {
        let n = self.n();
        if t == 0 || t > n {
            return Err(Error::StepOutOfRange { step: t, n });
        }
        if t == n {
            return Err(Error::TerminalStep { step: t });
        }
        let floor = self.floor(cm, t);
        if !(lqg_star > floor) {
            return Err(Error::CostAtFloor {
                step: t,
                cost: lqg_star,
                floor,
            });
        }
        let weight = self.distortion_weight(cm, t);
        if weight == 0.0 {
            return Err(Error::InvalidArgument {
                name: "lqg_star",
                value: lqg_star,
                reason: "the cost does not depend on the rate at this step",
            });
        }
        Ok((weight, lqg_star - floor))
    }

    /// Expected closed-loop cost of the certainty-equivalent controller when
    /// the decoder's estimation errors have second moments `distortions`:
    /// `sigma_x1^2 K_1 + sum_{t<n} (sigma_w_t^2 K_{t+1} + alpha_t beta_t L_t K_{t+1} D_t)`.
    ///
    /// With stationary noise (`sigma_x1^2 = sigma_w_t^2`) this equals the sum
    /// of the per-step costs `sigma_w_t^2 K_t + alpha_t beta_t L_t K_{t+1} D_t`.
    pub fn closed_loop_cost(&self, cm: &ControlModel, distortions: &[f64]) -> Result<f64> {
        self.check_rates(distortions)?;
        let n = self.n();
        let mut total = cm.source.sigma_x1_2 * self.k_at(1);
        for t in 1..n {
            total += cm.source.sigma_w2_at(t) * self.k_at(t + 1);
            total += self.distortion_weight(cm, t) * distortions[t - 1];
        }
        Ok(total)
    }

    fn check_rates(&self, rates: &[f64]) -> Result<()> {
        if rates.len() != self.n() {
            return Err(Error::LengthMismatch {
                field: "rates",
                expected: self.n(),
                got: rates.len(),
            });
        }
        Ok(())
    }
}

pub fn cost_lower(cm: &ControlModel, rates: &[f64]) -> Result<Vec<f64>> {
    riccati(cm)?.cost_lower(cm, rates)
}

pub fn cost_upper(cm: &ControlModel, rates_op: &[f64], lattice: &LatticeSpec, prefix: PrefixCost) -> Result<Vec<f64>> {
    riccati(cm)?.cost_upper(cm, rates_op, lattice, prefix)
}

pub fn rate_cost(cm: &ControlModel, lqg_star: f64, t: usize) -> Result<f64> {
    riccati(cm)?.rate_cost(cm, lqg_star, t)
}

/// Steps whose rate does not clear the stability floor while the distortion
/// term is active; each entry is `(step, rate, floor)`.
pub fn infeasible_steps(cm: &ControlModel, ric: &Riccati, rates: &[f64]) -> Vec<(usize, f64, f64)> {
    (1..cm.n())
        .filter(|&t| ric.distortion_weight(cm, t) != 0.0)
        .filter_map(|t| {
            let a = cm.source.alpha_at(t);
            let rate = rates[t - 1];
            ((2.0 * rate).exp2() <= a * a).then(|| (t, rate, stability_floor(a)))
        })
        .collect()
}

/// Full per-step table: Riccati values, lower and matched-rate upper costs,
/// and the rate-cost inverse.
///
/// `cost_upper` is evaluated at the same rates as `cost_lower`; steps where the
/// lattice-inflated floor is violated hold `+inf`. `rate_cost` holds `R_n` at
/// the final step and `NaN` where the cost does not depend on the rate.
pub fn lqg_bounds(cm: &ControlModel, rates: &[f64], lattice: &LatticeSpec, prefix: PrefixCost) -> Result<LqgSolution> {
    let ric = riccati(cm)?;
    let cost_lower = ric.cost_lower(cm, rates)?;
    lattice.validate()?;
    let inflation = lattice.inflation(prefix)?;
    let n = cm.n();
    let cost_upper = (1..=n)
        .map(|t| match ric.upper_at(cm, t, rates[t - 1], inflation) {
            Ok(v) => Ok(v),
            Err(Error::BelowStabilityFloor { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let rate_cost = (1..=n)
        .map(|t| {
            if t == n {
                rates[t - 1]
            } else {
                ric.rate_cost(cm, cost_lower[t - 1], t).unwrap_or(f64::NAN)
            }
        })
        .collect();
    Ok(LqgSolution {
        k: ric.k,
        l: ric.l,
        cost_lower,
        cost_upper,
        rate_cost,
    })
}

/// Infinite-horizon quantities for a time-invariant plant at rate `r_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateLqg {
    pub k: f64,
    pub l: f64,
    pub cost_lower: f64,
    pub cost_upper: f64,
}

/// Positive root of `beta^2 K^2 + f K - Q N = 0`, `f = (1 - alpha^2) N - beta^2 Q`.
pub fn steady_state_riccati(plant: &TimeInvariantPlant) -> f64 {
    let TimeInvariantPlant { alpha, beta, q, n_penalty, .. } = *plant;
    let b2 = beta * beta;
    let f = (1.0 - alpha * alpha) * n_penalty - b2 * q;
    let disc = (f * f + 4.0 * b2 * q * n_penalty).sqrt();
    if f > 0.0 {
        // Conjugate form avoids cancellation in disc - f.
        2.0 * q * n_penalty / (disc + f)
    } else {
        (disc - f) / (2.0 * b2)
    }
}

/// Steady-state gain, lower cost and lattice upper cost at rate `r_inf`.
///
/// Errors report `step = 0` for the steady-state regime.
pub fn steady_state_lqg(
    plant: &TimeInvariantPlant,
    r_inf: f64,
    lattice: &LatticeSpec,
    prefix: PrefixCost,
) -> Result<SteadyStateLqg> {
    lattice.validate()?;
    let inflation = lattice.inflation(prefix)?;
    let k = steady_state_riccati(plant);
    let l = plant.alpha * plant.beta * k / (plant.beta * plant.beta * k + plant.n_penalty);
    Ok(SteadyStateLqg {
        k,
        l,
        cost_lower: steady_state_cost(plant, r_inf, 1.0)?,
        cost_upper: steady_state_cost(plant, r_inf, inflation)?,
    })
}

/// `sigma_w^2 K_inf + alpha beta L_inf K_inf c sigma_w^2 / (2^{2R} - c alpha^2)`
/// for coding-noise inflation `c` (1 gives the lower bound).
pub fn steady_state_cost(plant: &TimeInvariantPlant, r_inf: f64, inflation: f64) -> Result<f64> {
    if plant.beta == 0.0 || !(plant.n_penalty > 0.0) || !(plant.q >= 0.0) || !(plant.sigma_w2 > 0.0) {
        return Err(Error::InvalidArgument {
            name: "plant",
            value: f64::NAN,
            reason: "needs beta != 0, N > 0, Q >= 0 and sigma_w2 > 0",
        });
    }
    if !(r_inf >= 0.0) {
        return Err(Error::InvalidArgument {
            name: "R_inf",
            value: r_inf,
            reason: "must be non-negative",
        });
    }
    let TimeInvariantPlant { alpha, beta, n_penalty, sigma_w2, .. } = *plant;
    let k = steady_state_riccati(plant);
    let l = alpha * beta * k / (beta * beta * k + n_penalty);
    let weight = alpha * beta * l * k;
    let floor = sigma_w2 * k;
    if weight == 0.0 {
        return Ok(floor);
    }
    let a2 = alpha * alpha;
    let denom = (2.0 * r_inf).exp2() - inflation * a2;
    if denom <= 0.0 {
        return Err(Error::BelowStabilityFloor {
            step: 0,
            rate: r_inf,
            floor: 0.5 * (inflation * a2).log2().max(0.0),
        });
    }
    Ok(floor + weight * inflation * sigma_w2 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::G_GAUSSIAN_FLOOR;
    use crate::model::SourceModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    fn unit(n: usize) -> ControlModel {
        ControlModel::time_invariant(n, TimeInvariantPlant::unit(), 1.0).unwrap()
    }

    #[test]
    fn one_step_horizon() {
        let source = SourceModel::new(vec![1.7], vec![1.0], 1.0).unwrap();
        let cm = ControlModel::new(source, vec![0.3], vec![2.5], vec![1.0]).unwrap();
        let ric = riccati(&cm).unwrap();
        assert_eq!(ric.k, vec![2.5, 0.0]);
        assert_eq!(ric.l, vec![0.0]);
    }

    #[test]
    fn unit_riccati_reaches_golden_ratio() {
        let ric = riccati(&unit(1000)).unwrap();
        assert!((ric.k[0] - GOLDEN).abs() < 1e-12);
        assert!((ric.l[0] - (GOLDEN - 1.0)).abs() < 1e-12);
        assert_eq!(ric.k[1000], 0.0);
    }

    #[test]
    fn zero_state_penalty_zeroes_everything() {
        let mut cm = unit(10);
        cm.q = vec![0.0; 10];
        let ric = riccati(&cm).unwrap();
        assert!(ric.k.iter().all(|&k| k == 0.0));
        assert!(ric.l.iter().all(|&l| l == 0.0));
        let costs = ric.cost_lower(&cm, &[0.0; 10]).unwrap();
        assert!(costs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn terminal_cost_ignores_rate() {
        let cm = unit(5);
        let ric = riccati(&cm).unwrap();
        for r in [0.0, 0.7, 5.0] {
            let costs = ric.cost_lower(&cm, &[3.0, 3.0, 3.0, 3.0, r]).unwrap();
            assert_eq!(costs[4], ric.k[4]);
        }
    }

    #[test]
    fn steady_unit_lower_cost() {
        // a scalar lattice cannot stabilize at half a bit, so use the ideal one
        let ideal = LatticeSpec::custom(usize::MAX, G_GAUSSIAN_FLOOR).unwrap();
        let ss = steady_state_lqg(&TimeInvariantPlant::unit(), 0.5, &ideal, PrefixCost::Omitted).unwrap();
        assert!((ss.cost_upper - ss.cost_lower).abs() < 1e-12);
        assert!(matches!(
            steady_state_lqg(&TimeInvariantPlant::unit(), 0.5, &LatticeSpec::scalar(), PrefixCost::Included),
            Err(Error::BelowStabilityFloor { step: 0, .. })
        ));
        assert!((ss.k - GOLDEN).abs() < 1e-12);
        assert!((ss.l - (1.0 + 5f64.sqrt()) / (3.0 + 5f64.sqrt())).abs() < 1e-12);
        assert!((ss.cost_lower - 2.61803).abs() < 1e-5);
        // the same value from a long finite horizon, deep inside
        let cm = unit(400);
        let costs = cost_lower(&cm, &[0.5; 400]).unwrap();
        assert!((costs[0] - 2.61803).abs() < 1e-5);
    }

    #[test]
    fn upper_cost_scalar_example() {
        let cm = unit(400);
        let ric = riccati(&cm).unwrap();
        let costs = ric.cost_upper(&cm, &[2.0; 400], &LatticeSpec::scalar(), PrefixCost::Included).unwrap();
        // Independent recomputation of the inflated distortion term.
        let c = 4.0 * (2.0 * std::f64::consts::PI * std::f64::consts::E / 12.0);
        let denom = 16.0 - c;
        assert!((denom - 10.307).abs() < 1e-3);
        let expected = GOLDEN + (GOLDEN - 1.0) * GOLDEN * c / denom;
        assert_relative_eq!(costs[0], expected, max_relative = 1e-10);
        assert!((costs[0] - 2.17039).abs() < 1e-4);
        assert_eq!(costs[399], ric.floor(&cm, 400));
    }

    #[test]
    fn ideal_lattice_collapses_upper_to_lower() {
        let cm = unit(30);
        let rates = vec![1.3; 30];
        let ideal = LatticeSpec::custom(usize::MAX, G_GAUSSIAN_FLOOR).unwrap();
        let lo = cost_lower(&cm, &rates).unwrap();
        let up = cost_upper(&cm, &rates, &ideal, PrefixCost::Omitted).unwrap();
        for (a, b) in lo.iter().zip(&up) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn rate_cost_floor_and_errors() {
        let plant = TimeInvariantPlant { alpha: 2.0, ..TimeInvariantPlant::unit() };
        let cm = ControlModel::time_invariant(50, plant, 1.0).unwrap();
        let ric = riccati(&cm).unwrap();
        let floor = ric.floor(&cm, 10);
        for excess in [1e-6, 1e-2, 1.0, 1e3, 1e9] {
            let r = ric.rate_cost(&cm, floor + excess, 10).unwrap();
            assert!(r > 1.0, "{r}");
        }
        let far = ric.rate_cost(&cm, floor + 1e12, 10).unwrap();
        assert!(far - 1.0 < 1e-9);
        assert!(matches!(ric.rate_cost(&cm, floor, 10), Err(Error::CostAtFloor { .. })));
        assert!(matches!(ric.rate_cost(&cm, floor + 1.0, 50), Err(Error::TerminalStep { step: 50 })));
    }

    #[test]
    fn infeasible_rates_are_errors() {
        let plant = TimeInvariantPlant { alpha: 2.0, ..TimeInvariantPlant::unit() };
        let cm = ControlModel::time_invariant(4, plant, 1.0).unwrap();
        let err = cost_lower(&cm, &[0.5, 2.0, 2.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::BelowStabilityFloor { step: 1, rate: 0.5, floor: 1.0 });
        let ric = riccati(&cm).unwrap();
        let bad = infeasible_steps(&cm, &ric, &[0.5, 2.0, 1.0, 0.0]);
        assert_eq!(bad, vec![(1, 0.5, 1.0), (3, 1.0, 1.0)]);
        assert!(steady_state_lqg(&plant, 0.9, &LatticeSpec::scalar(), PrefixCost::Included).is_err());
    }

    #[test]
    fn zero_weight_steady_state() {
        let plant = TimeInvariantPlant { q: 0.0, ..TimeInvariantPlant::unit() };
        let ss = steady_state_lqg(&plant, 0.0, &LatticeSpec::scalar(), PrefixCost::Included).unwrap();
        assert_eq!((ss.k, ss.cost_lower, ss.cost_upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bounds_table_marks_infeasible_upper_steps() {
        let cm = unit(6);
        let rates = [0.6, 0.6, 0.6, 0.6, 2.0, 0.1];
        let sol = lqg_bounds(&cm, &rates, &LatticeSpec::scalar(), PrefixCost::Included).unwrap();
        assert!(sol.cost_upper[0].is_infinite());
        assert!(sol.cost_upper[4].is_finite());
        assert_eq!(sol.rate_cost[5], 0.1);
        for (got, want) in sol.rate_cost.iter().zip(&rates).take(5) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    fn arb_instance() -> impl Strategy<Value = (ControlModel, Vec<f64>)> {
        (2usize..10).prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![-2.5..-0.1f64, 0.1..2.5f64], n),
                prop::collection::vec(prop_oneof![-2.0..-0.2f64, 0.2..2.0f64], n),
                prop::collection::vec(0.1..3.0f64, n),
                prop::collection::vec(0.1..3.0f64, n),
                prop::collection::vec(0.1..3.0f64, n),
                prop::collection::vec(0.0..3.0f64, n),
            )
                .prop_map(|(a, b, s, q, np, extra)| {
                    let rates = a.iter().zip(&extra).map(|(a, e)| stability_floor(*a) + 0.05 + e).collect();
                    let source = SourceModel::new(a, s, 1.0).unwrap();
                    (ControlModel::new(source, b, q, np).unwrap(), rates)
                })
        })
    }

    proptest! {
        #[test]
        fn riccati_positivity((cm, _) in arb_instance()) {
            let ric = riccati(&cm).unwrap();
            for t in 1..=cm.n() {
                prop_assert!(ric.k_at(t) >= cm.q[t - 1] - 1e-12);
                prop_assert!(ric.distortion_weight(&cm, t) >= 0.0);
            }
        }

        #[test]
        fn rate_cost_inverts_cost_lower((cm, rates) in arb_instance()) {
            let ric = riccati(&cm).unwrap();
            let costs = ric.cost_lower(&cm, &rates).unwrap();
            for t in 1..cm.n() {
                let r = ric.rate_cost(&cm, costs[t - 1], t).unwrap();
                prop_assert!((r - rates[t - 1]).abs() < 1e-9);
                let alt = ric.rate_cost_substituted(&cm, costs[t - 1], t).unwrap();
                prop_assert!((r - alt).abs() < 1e-12);
            }
        }

        #[test]
        fn upper_dominates_lower((cm, rates) in arb_instance(), p in 1usize..64) {
            let lattice = LatticeSpec::zador_sphere(p).unwrap();
            let ric = riccati(&cm).unwrap();
            let lo = ric.cost_lower(&cm, &rates).unwrap();
            if let Ok(up) = ric.cost_upper(&cm, &rates, &lattice, PrefixCost::Included) {
                for t in 0..cm.n() {
                    prop_assert!(up[t] >= lo[t]);
                }
            }
        }

        #[test]
        fn separation_limit_is_monotone((cm, rates) in arb_instance()) {
            let ric = riccati(&cm).unwrap();
            let mut prev = ric.cost_lower(&cm, &rates).unwrap();
            for bump in [1.0, 4.0, 16.0, 40.0] {
                let higher: Vec<f64> = rates.iter().map(|r| r + bump).collect();
                let costs = ric.cost_lower(&cm, &higher).unwrap();
                for t in 1..=cm.n() {
                    let floor = ric.floor(&cm, t);
                    prop_assert!(costs[t - 1] >= floor);
                    prop_assert!(costs[t - 1] <= prev[t - 1]);
                }
                prev = costs;
            }
            for t in 1..=cm.n() {
                let floor = ric.floor(&cm, t);
                prop_assert!((prev[t - 1] - floor).abs() <= 1e-9 * floor.max(1.0));
            }
        }
    }
}
