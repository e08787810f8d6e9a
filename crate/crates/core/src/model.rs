//! Parameter and result types shared by every solver.
//!
//! All per-step arrays are stored 0-based (`alpha[0]` is the coefficient at
//! step 1); every function that takes a step index takes it 1-based.
//! Quantities are per dimension: the `p` parallel components share the same
//! scalar coefficients, so a single scalar recursion describes all of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice;

/// Parallel time-varying Gauss-Markov source
/// `x_{t+1} = alpha_t x_t + w_t`, `w_t ~ N(0, sigma_w2[t])`, `x_1 ~ N(0, sigma_x1_2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModel {
    pub n: usize,
    #[serde(default = "one")]
    pub p: usize,
    pub alpha: Vec<f64>,
    pub sigma_w2: Vec<f64>,
    pub sigma_x1_2: f64,
}

fn one() -> usize {
    1
}

impl SourceModel {
    /// Builds a scalar (`p = 1`) model, inferring `n` from `alpha`.
    pub fn new(alpha: Vec<f64>, sigma_w2: Vec<f64>, sigma_x1_2: f64) -> Result<Self> {
        let model = SourceModel {
            n: alpha.len(),
            p: 1,
            alpha,
            sigma_w2,
            sigma_x1_2,
        };
        validate_source(&model)?;
        Ok(model)
    }

    pub fn time_invariant(n: usize, alpha: f64, sigma_w2: f64, sigma_x1_2: f64) -> Result<Self> {
        Self::new(vec![alpha; n], vec![sigma_w2; n], sigma_x1_2)
    }

    pub fn with_dimension(mut self, p: usize) -> Result<Self> {
        self.p = p;
        validate_source(&self)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        validate_source(self)
    }

    /// Coefficient at 1-based step `t`.
    pub fn alpha_at(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    pub fn sigma_w2_at(&self, t: usize) -> f64 {
        self.sigma_w2[t - 1]
    }

    /// `b_t^2 = alpha_t^2 / sigma_w_t^2`.
    pub fn b2(&self, t: usize) -> f64 {
        let a = self.alpha_at(t);
        a * a / self.sigma_w2_at(t)
    }

    /// Returns the shared `(alpha, sigma_w2)` when the model is time-invariant.
    pub fn time_invariant_params(&self) -> Result<(f64, f64)> {
        let alpha = constant(&self.alpha, "alpha")?;
        let sigma_w2 = constant(&self.sigma_w2, "sigma_w2")?;
        Ok((alpha, sigma_w2))
    }

    /// Same parameters truncated or extended to horizon `n`
    /// (time-invariant models only).
    pub fn with_horizon(&self, n: usize) -> Result<Self> {
        let (alpha, sigma_w2) = self.time_invariant_params()?;
        Self::time_invariant(n, alpha, sigma_w2, self.sigma_x1_2)?.with_dimension(self.p)
    }

    pub fn to_toml(&self) -> Result<String> {
        to_toml(self)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let model: Self = from_toml(text)?;
        validate_source(&model)?;
        Ok(model)
    }
}

fn constant(values: &[f64], field: &'static str) -> Result<f64> {
    let first = *values.first().ok_or(Error::EmptyHorizon)?;
    if values.iter().all(|&v| v == first) {
        Ok(first)
    } else {
        Err(Error::NotTimeInvariant { field })
    }
}

fn check_len(field: &'static str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::LengthMismatch {
            field,
            expected: n,
            got: values.len(),
        });
    }
    Ok(())
}

fn check_finite(field: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            field,
            step: i + 1,
            value: values[i],
        }),
        None => Ok(()),
    }
}

pub fn validate_source(model: &SourceModel) -> Result<()> {
    if model.n == 0 {
        return Err(Error::EmptyHorizon);
    }
    if model.p == 0 {
        return Err(Error::ZeroDimension);
    }
    check_len("alpha", &model.alpha, model.n)?;
    check_len("sigma_w2", &model.sigma_w2, model.n)?;
    check_finite("alpha", &model.alpha)?;
    check_finite("sigma_w2", &model.sigma_w2)?;
    if let Some(i) = model.sigma_w2.iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveVariance {
            field: "sigma_w2",
            step: i + 1,
            value: model.sigma_w2[i],
        });
    }
    if !model.sigma_x1_2.is_finite() {
        return Err(Error::NonFinite {
            field: "sigma_x1_2",
            step: 1,
            value: model.sigma_x1_2,
        });
    }
    if model.sigma_x1_2 <= 0.0 {
        return Err(Error::NonPositiveVariance {
            field: "sigma_x1_2",
            step: 1,
            value: model.sigma_x1_2,
        });
    }
    Ok(())
}

/// Controlled plant `x_{t+1} = alpha_t x_t + beta_t u_t + w_t` with
/// quadratic penalties `Q_t x_t^2 + N_t u_t^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlModel {
    pub source: SourceModel,
    pub beta: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "N")]
    pub n_penalty: Vec<f64>,
}

impl ControlModel {
    pub fn new(source: SourceModel, beta: Vec<f64>, q: Vec<f64>, n_penalty: Vec<f64>) -> Result<Self> {
        let model = ControlModel {
            source,
            beta,
            q,
            n_penalty,
        };
        validate_control(&model)?;
        Ok(model)
    }

    pub fn time_invariant(n: usize, plant: TimeInvariantPlant, sigma_x1_2: f64) -> Result<Self> {
        let source = SourceModel::time_invariant(n, plant.alpha, plant.sigma_w2, sigma_x1_2)?;
        Self::new(
            source,
            vec![plant.beta; n],
            vec![plant.q; n],
            vec![plant.n_penalty; n],
        )
    }

    pub fn n(&self) -> usize {
        self.source.n
    }

    pub fn validate(&self) -> Result<()> {
        validate_control(self)
    }

    pub fn time_invariant_params(&self) -> Result<TimeInvariantPlant> {
        let (alpha, sigma_w2) = self.source.time_invariant_params()?;
        Ok(TimeInvariantPlant {
            alpha,
            beta: constant(&self.beta, "beta")?,
            q: constant(&self.q, "Q")?,
            n_penalty: constant(&self.n_penalty, "N")?,
            sigma_w2,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        to_toml(self)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let model: Self = from_toml(text)?;
        validate_control(&model)?;
        Ok(model)
    }
}

pub fn validate_control(model: &ControlModel) -> Result<()> {
    validate_source(&model.source)?;
    let n = model.source.n;
    check_len("beta", &model.beta, n)?;
    check_len("Q", &model.q, n)?;
    check_len("N", &model.n_penalty, n)?;
    check_finite("beta", &model.beta)?;
    check_finite("Q", &model.q)?;
    check_finite("N", &model.n_penalty)?;
    if let Some(i) = model.beta.iter().position(|&b| b == 0.0) {
        return Err(Error::ZeroInputGain { step: i + 1 });
    }
    if let Some(i) = model.n_penalty.iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveInputPenalty {
            step: i + 1,
            value: model.n_penalty[i],
        });
    }
    if let Some(i) = model.q.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeStatePenalty {
            step: i + 1,
            value: model.q[i],
        });
    }
    Ok(())
}

/// Scalar parameters of a time-invariant controlled plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInvariantPlant {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub n_penalty: f64,
    pub sigma_w2: f64,
}

impl TimeInvariantPlant {
    pub fn unit() -> Self {
        TimeInvariantPlant {
            alpha: 1.0,
            beta: 1.0,
            q: 1.0,
            n_penalty: 1.0,
            sigma_w2: 1.0,
        }
    }
}

/// Per-step distortion and rate allocation produced by reverse-waterfilling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub theta: f64,
    #[serde(rename = "D_target", default, skip_serializing_if = "Option::is_none")]
    pub d_target: Option<f64>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Set when the budget covers the prediction-error variances and no
    /// bits are spent at any step.
    #[serde(default)]
    pub zero_rate: bool,
}

impl Schedule {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn mean_distortion(&self) -> f64 {
        self.d.iter().sum::<f64>() / self.d.len() as f64
    }

    pub fn total_rate(&self) -> f64 {
        self.r.iter().sum()
    }

    pub fn mean_rate(&self) -> f64 {
        self.total_rate() / self.r.len() as f64
    }

    /// Checks the structural invariants against `model`; `tol` is the relative
    /// tolerance for the prediction-variance recursion and rate formula.
    pub fn check(&self, model: &SourceModel, tol: f64) -> Result<()> {
        let n = model.n;
        let mismatch = |msg: String| Err(Error::ScheduleMismatch(msg));
        for (field, len) in [("D", self.d.len()), ("lambda", self.lambda.len()), ("R", self.r.len())] {
            if len != n {
                return mismatch(format!("`{field}` has {len} entries, model horizon is {n}"));
            }
        }
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        for t in 1..=n {
            let (d, lam, r) = (self.d[t - 1], self.lambda[t - 1], self.r[t - 1]);
            let expected_lambda = if t == 1 {
                model.sigma_x1_2
            } else {
                let a = model.alpha_at(t - 1);
                a * a * self.d[t - 2] + model.sigma_w2_at(t - 1)
            };
            if !close(lam, expected_lambda) {
                return mismatch(format!("lambda at step {t} is {lam}, recursion gives {expected_lambda}"));
            }
            if !(d > 0.0 && d <= lam) {
                return mismatch(format!("D at step {t} is {d}, must lie in (0, lambda = {lam}]"));
            }
            let expected_rate = rate_from_variances(lam, d);
            if r < 0.0 || !close(r, expected_rate) {
                return mismatch(format!("R at step {t} is {r}, expected {expected_rate}"));
            }
        }
        if let (Some(residual), Some(target)) = (self.residual, self.d_target) {
            let actual = (self.mean_distortion() - target).abs();
            if !close(residual, actual) && (residual - actual).abs() > 1e-15 {
                return mismatch(format!("residual {residual} disagrees with |mean(D) - D| = {actual}"));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        to_toml(self)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        from_toml(text)
    }
}

/// `max(0, 1/2 log2(lambda / D))`; exactly zero when `D >= lambda`.
pub fn rate_from_variances(lambda: f64, d: f64) -> f64 {
    if d >= lambda {
        0.0
    } else {
        0.5 * (lambda / d).log2()
    }
}

/// Lattice family used for the achievable (upper) bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeMode {
    Scalar,
    Leech,
    ZadorSphere,
    ZadorUpper,
    Custom,
}

impl LatticeMode {
    pub fn name(self) -> &'static str {
        match self {
            LatticeMode::Scalar => "scalar",
            LatticeMode::Leech => "leech",
            LatticeMode::ZadorSphere => "zador-sphere",
            LatticeMode::ZadorUpper => "zador-upper",
            LatticeMode::Custom => "custom",
        }
    }
}

impl std::fmt::Display for LatticeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LatticeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(LatticeMode::Scalar),
            "leech" => Ok(LatticeMode::Leech),
            "zador-sphere" => Ok(LatticeMode::ZadorSphere),
            "zador-upper" => Ok(LatticeMode::ZadorUpper),
            "custom" => Ok(LatticeMode::Custom),
            other => Err(format!(
                "unknown lattice mode `{other}` (expected scalar, leech, zador-sphere, zador-upper or custom)"
            )),
        }
    }
}

/// Quantizer dimension and the normalized second moment `G_p` in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub p: usize,
    pub mode: LatticeMode,
    pub g: f64,
}

impl LatticeSpec {
    pub fn scalar() -> Self {
        LatticeSpec {
            p: 1,
            mode: LatticeMode::Scalar,
            g: lattice::G_SCALAR,
        }
    }

    pub fn leech() -> Self {
        LatticeSpec {
            p: 24,
            mode: LatticeMode::Leech,
            g: lattice::G_LEECH,
        }
    }

    pub fn zador_sphere(p: usize) -> Result<Self> {
        Ok(LatticeSpec {
            p,
            mode: LatticeMode::ZadorSphere,
            g: lattice::g_sphere(p)?,
        })
    }

    pub fn zador_upper(p: usize) -> Result<Self> {
        Ok(LatticeSpec {
            p,
            mode: LatticeMode::ZadorUpper,
            g: lattice::g_zador_upper(p)?,
        })
    }

    pub fn custom(p: usize, g: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(g >= lattice::G_GAUSSIAN_FLOOR) {
            return Err(Error::BelowGaussianFloor { g });
        }
        Ok(LatticeSpec {
            p,
            mode: LatticeMode::Custom,
            g,
        })
    }

    /// Builds a spec for `mode` at dimension `p`; tabulated modes reject
    /// dimensions other than their own.
    pub fn from_mode(mode: LatticeMode, p: usize) -> Result<Self> {
        match mode {
            LatticeMode::Scalar | LatticeMode::Leech => {
                let g = lattice::g_known(mode, p)?;
                Ok(LatticeSpec { p, mode, g })
            }
            LatticeMode::ZadorSphere => Self::zador_sphere(p),
            LatticeMode::ZadorUpper => Self::zador_upper(p),
            LatticeMode::Custom => Err(Error::UnknownLattice {
                mode: "custom (needs an explicit g)".into(),
                p,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(self.g >= lattice::G_GAUSSIAN_FLOOR) {
            return Err(Error::BelowGaussianFloor { g: self.g });
        }
        if self.mode == LatticeMode::Scalar && (self.p != 1 || self.g != lattice::G_SCALAR) {
            return Err(Error::UnknownLattice {
                mode: "scalar".into(),
                p: self.p,
            });
        }
        Ok(())
    }
}

/// Riccati sequence, gains and per-step cost bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqgSolution {
    /// `K[0..=n]`; the last entry is the terminal `K_{n+1} = 0`.
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub cost_lower: Vec<f64>,
    pub cost_upper: Vec<f64>,
    pub rate_cost: Vec<f64>,
}

impl LqgSolution {
    pub fn total_lower(&self) -> f64 {
        self.cost_lower.iter().sum()
    }

    pub fn total_upper(&self) -> f64 {
        self.cost_upper.iter().sum()
    }
}

pub(crate) fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Serialization(e.to_string()))
}

pub(crate) fn from_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit2() -> SourceModel {
        SourceModel::new(vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn well_formed_source_is_ok() {
        assert!(unit2().validate().is_ok());
    }

    #[test]
    fn zero_noise_variance_is_rejected() {
        let err = SourceModel::new(vec![1.0, 1.0], vec![1.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveVariance { field: "sigma_w2", step: 2, .. }));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let model = SourceModel {
            n: 2,
            p: 1,
            alpha: vec![1.0, 1.0, 1.0],
            sigma_w2: vec![1.0, 1.0],
            sigma_x1_2: 1.0,
        };
        assert_eq!(
            validate_source(&model),
            Err(Error::LengthMismatch {
                field: "alpha",
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn empty_horizon_is_rejected() {
        assert_eq!(SourceModel::new(vec![], vec![], 1.0), Err(Error::EmptyHorizon));
    }

    #[test]
    fn unstable_and_negative_alpha_are_legal() {
        assert!(SourceModel::new(vec![-3.0, 0.0, 2.5], vec![1.0; 3], 1.0).is_ok());
    }

    #[test]
    fn control_validation() {
        let ok = ControlModel::new(unit2(), vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!(ok.is_ok());
        let err = ControlModel::new(unit2(), vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveInputPenalty { step: 1, .. }));
        let err = ControlModel::new(unit2(), vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::ZeroInputGain { step: 1 });
        let err = ControlModel::new(unit2(), vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NegativeStatePenalty { step: 1, .. }));
    }

    #[test]
    fn source_toml_uses_field_names() {
        let text = unit2().to_toml().unwrap();
        for key in ["n =", "p =", "alpha =", "sigma_w2 =", "sigma_x1_2 ="] {
            assert!(text.contains(key), "{text}");
        }
        assert_eq!(SourceModel::from_toml(&text).unwrap(), unit2());
    }

    #[test]
    fn control_toml_round_trip() {
        let cm = ControlModel::new(unit2(), vec![1.0, 2.0], vec![0.5, 1.0], vec![1.0, 3.0]).unwrap();
        let text = cm.to_toml().unwrap();
        assert!(text.contains("Q =") && text.contains("N =") && text.contains("[source]"));
        assert_eq!(ControlModel::from_toml(&text).unwrap(), cm);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SourceModel::from_toml("n = 1\nalpha = [1.0]\nsigma_w2 = [1.0]\nsigma_x1_2 = 1.0\nbogus = 3\n")
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn scalar_lattice_forces_unit_dimension() {
        let mut spec = LatticeSpec::scalar();
        assert!(spec.validate().is_ok());
        spec.p = 2;
        assert!(spec.validate().is_err());
        assert!(LatticeSpec::custom(4, 0.01).is_err());
    }

    fn arb_f64() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>(),
            -10.0..10.0f64,
            Just(0.0),
            Just(f64::NAN),
            Just(f64::INFINITY)
        ]
    }

    proptest! {
        #[test]
        fn validation_is_total(
            n in 0usize..5,
            p in 0usize..3,
            alpha in prop::collection::vec(arb_f64(), 0..6),
            sigma in prop::collection::vec(arb_f64(), 0..6),
            sx in arb_f64(),
            beta in prop::collection::vec(arb_f64(), 0..6),
            q in prop::collection::vec(arb_f64(), 0..6),
            nn in prop::collection::vec(arb_f64(), 0..6),
        ) {
            let source = SourceModel { n, p, alpha, sigma_w2: sigma, sigma_x1_2: sx };
            let source_ok = validate_source(&source).is_ok();
            let cm = ControlModel { source, beta, q, n_penalty: nn };
            let control_ok = validate_control(&cm).is_ok();
            prop_assert!(!control_ok || source_ok);
        }

        #[test]
        fn accepted_schedule_round_trips(
            alpha in prop::collection::vec(-2.0..2.0f64, 1..8),
            fracs in prop::collection::vec(0.01..=1.0f64, 8),
            sx in 0.1..5.0f64,
            theta in 1e-3..1e3f64,
        ) {
            let n = alpha.len();
            let model = SourceModel::new(alpha, vec![1.0; n], sx).unwrap();
            let mut d = Vec::with_capacity(n);
            let mut lambda = Vec::with_capacity(n);
            let mut lam = sx;
            for (t, frac) in fracs.iter().enumerate().take(n) {
                let dt = frac * lam;
                lambda.push(lam);
                d.push(dt);
                lam = model.alpha[t] * model.alpha[t] * dt + model.sigma_w2[t];
            }
            let r = lambda.iter().zip(&d).map(|(&l, &d)| rate_from_variances(l, d)).collect();
            let schedule = Schedule { d, lambda, r, theta, d_target: None, iterations: 0, residual: None, zero_rate: false };
            prop_assert!(schedule.check(&model, 1e-12).is_ok());
            let back = Schedule::from_toml(&schedule.to_toml().unwrap()).unwrap();
            prop_assert_eq!(back, schedule);
        }
    }
}
