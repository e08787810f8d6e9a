//! Flat TOML experiment configs.
//!
//! Every key is optional at parse time; each command asks for the keys it
//! needs and reports the missing one by name. Unknown keys are rejected.

use std::path::Path;

use gmbounds_core::{ControlModel, LatticeMode, LatticeSpec, SimMode, SourceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::CliError;

pub const PRESETS: [(&str, &str); 3] = [
    ("fig3", include_str!("../../../configs/fig3.toml")),
    ("fig5a", include_str!("../../../configs/fig5a.toml")),
    ("fig5b", include_str!("../../../configs/fig5b.toml")),
];

/// A scalar broadcast over the horizon, or one value per step.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerStep {
    Scalar(f64),
    Steps(Vec<f64>),
}

impl PerStep {
    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            PerStep::Scalar(v) => vec![*v; n],
            PerStep::Steps(v) => v.clone(),
        }
    }

    fn single(&self, key: &str) -> Result<f64, CliError> {
        match self {
            PerStep::Scalar(v) => Ok(*v),
            PerStep::Steps(v) => match v.first() {
                Some(&first) if v.iter().all(|&x| x == first) => Ok(first),
                _ => Err(CliError::Config(format!("`{key}` must be a single value for steady-state sweeps"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Waterfill,
    Bounds,
    Lqg,
    Simulate,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepParam {
    D,
    #[serde(rename = "R_inf")]
    RInf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub task: Option<Task>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub alpha: Option<PerStep>,
    /// Draw `alpha_t` uniformly from `[lo, hi)` with `seed`.
    pub alpha_uniform: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub sigma_w2: Option<PerStep>,
    pub sigma_x1_2: Option<f64>,
    #[serde(rename = "D_target")]
    pub d_target: Option<f64>,
    pub eps: Option<f64>,
    pub lattice: Option<Vec<LatticeMode>>,
    /// Dimension for zador-sphere, zador-upper and custom lattices.
    pub lattice_p: Option<usize>,
    pub lattice_g: Option<f64>,
    pub prefix_term: Option<bool>,
    pub beta: Option<PerStep>,
    #[serde(rename = "Q")]
    pub q: Option<PerStep>,
    #[serde(rename = "N")]
    pub n_penalty: Option<PerStep>,
    pub mode: Option<SimMode>,
    pub trials: Option<usize>,
    /// Simulate the closed loop instead of pure estimation.
    pub control: Option<bool>,
    pub sweep_param: Option<SweepParam>,
    pub sweep_values: Option<Vec<f64>>,
    pub sweep_start: Option<f64>,
    pub sweep_stop: Option<f64>,
    pub sweep_points: Option<usize>,
    pub sweep_scale: Option<SweepScale>,
}

pub const MAX_SWEEP_POINTS: usize = 1_000_000;

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(key, _)| *key == name)
            .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}` (known: fig3, fig5a, fig5b)")))?;
        Self::parse(text, &format!("preset {name}"))
    }

    pub fn horizon(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| missing("n"))
    }

    pub fn dimension(&self) -> usize {
        self.p.unwrap_or(1)
    }

    pub fn alpha_values(&self, n: usize) -> Result<Vec<f64>, CliError> {
        match (&self.alpha, self.alpha_uniform) {
            (Some(_), Some(_)) => Err(CliError::Config("set only one of `alpha` and `alpha_uniform`".into())),
            (Some(a), None) => Ok(a.expand(n)),
            (None, Some([lo, hi])) => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(CliError::Config(format!("`alpha_uniform` needs lo < hi, got [{lo}, {hi}]")));
                }
                let seed = self.seed.ok_or_else(|| missing("seed"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n).map(|_| rng.random_range(lo..hi)).collect())
            }
            (None, None) => Err(missing("alpha")),
        }
    }

    pub fn source(&self) -> Result<SourceModel, CliError> {
        let n = self.horizon()?;
        let alpha = self.alpha_values(n)?;
        let sigma_w2 = self.sigma_w2.as_ref().ok_or_else(|| missing("sigma_w2"))?.expand(n);
        let sx = self.sigma_x1_2.ok_or_else(|| missing("sigma_x1_2"))?;
        Ok(SourceModel::new(alpha, sigma_w2, sx)?.with_dimension(self.dimension())?)
    }

    pub fn control(&self) -> Result<ControlModel, CliError> {
        let source = self.source()?;
        let n = source.n;
        let get = |v: &Option<PerStep>, key: &str| v.as_ref().map(|x| x.expand(n)).ok_or_else(|| missing(key));
        Ok(ControlModel::new(
            source,
            get(&self.beta, "beta")?,
            get(&self.q, "Q")?,
            get(&self.n_penalty, "N")?,
        )?)
    }

    pub fn d_target(&self) -> Result<f64, CliError> {
        self.d_target.ok_or_else(|| missing("D_target"))
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(gmbounds_core::DEFAULT_EPS)
    }

    pub fn lattices(&self) -> Result<Vec<LatticeSpec>, CliError> {
        let modes = self.lattice.clone().unwrap_or_else(|| vec![LatticeMode::Scalar]);
        let p = self.lattice_p.unwrap_or(self.dimension());
        modes
            .into_iter()
            .map(|mode| match mode {
                LatticeMode::Custom => {
                    let g = self.lattice_g.ok_or_else(|| missing("lattice_g"))?;
                    Ok(LatticeSpec::custom(p, g)?)
                }
                LatticeMode::ZadorSphere | LatticeMode::ZadorUpper => Ok(LatticeSpec::from_mode(mode, p)?),
                LatticeMode::Scalar => Ok(LatticeSpec::scalar()),
                LatticeMode::Leech => Ok(LatticeSpec::leech()),
            })
            .collect()
    }

    pub fn scalar(&self, v: &Option<PerStep>, key: &str) -> Result<f64, CliError> {
        v.as_ref().ok_or_else(|| missing(key))?.single(key)
    }

    pub fn time_invariant_alpha(&self) -> Result<f64, CliError> {
        if self.alpha_uniform.is_some() {
            return Err(CliError::Config("steady-state sweeps need a fixed `alpha`".into()));
        }
        self.scalar(&self.alpha, "alpha")
    }

    /// Grid points for a sweep, from `sweep_values` or a start/stop/points range.
    pub fn sweep_grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(values) = &self.sweep_values {
            if self.sweep_points.is_some() || self.sweep_start.is_some() || self.sweep_stop.is_some() {
                return Err(CliError::Config("set either `sweep_values` or a sweep range, not both".into()));
            }
            if values.len() > MAX_SWEEP_POINTS {
                return Err(CliError::Config(format!(
                    "sweep grid has {} points, limit is {MAX_SWEEP_POINTS}",
                    values.len()
                )));
            }
            return Ok(values.clone());
        }
        let points = self.sweep_points.ok_or_else(|| missing("sweep_values"))?;
        if points > MAX_SWEEP_POINTS {
            return Err(CliError::Config(format!(
                "sweep grid has {points} points, limit is {MAX_SWEEP_POINTS}"
            )));
        }
        if points == 0 {
            return Ok(Vec::new());
        }
        let start = self.sweep_start.ok_or_else(|| missing("sweep_start"))?;
        let stop = self.sweep_stop.ok_or_else(|| missing("sweep_stop"))?;
        let scale = self.sweep_scale.unwrap_or_default();
        if scale == SweepScale::Log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::Config("log sweeps need positive `sweep_start` and `sweep_stop`".into()));
        }
        let frac = |k: usize| if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
        Ok((0..points)
            .map(|k| match scale {
                SweepScale::Linear => start + (stop - start) * frac(k),
                SweepScale::Log => (start.ln() + (stop.ln() - start.ln()) * frac(k)).exp(),
            })
            .collect())
    }
}
