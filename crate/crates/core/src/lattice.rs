//! Quantizer second-moment constants and the ECDQ rate gap.
//!
//! `G_p` is the dimensionless normalized second moment of a lattice Voronoi
//! cell. Every lattice satisfies `1/(2 pi e) <= G(S_p) <= G_p <= 1/12`, where
//! `G(S_p)` is the value for a `p`-ball. Zador's sphere value is a lower bound
//! on `G_p`, and his random-coding argument gives an upper bound; both tend to
//! the Gaussian floor as `p` grows.

use std::f64::consts::{E, PI};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{LatticeMode, LatticeSpec, Schedule};
use crate::waterfill;

/// `G_1`, the uniform scalar quantizer.
pub const G_SCALAR: f64 = 1.0 / 12.0;

/// `1/(2 pi e)`, the limit for an ideal infinite-dimensional quantizer.
pub const G_GAUSSIAN_FLOOR: f64 = 1.0 / (2.0 * PI * E);

/// Normalized second moment of the Leech lattice `Lambda_24`.
///
/// Conway & Sloane, *Sphere Packings, Lattices and Groups*, Table 2.3:
/// `G(Lambda_24) = 0.065771`. Back-solving a 0.126 bits/dimension ECDQ gap at
/// `p = 24` gives 0.065805, which agrees to 0.05%.
pub const G_LEECH: f64 = 0.065771;

/// Whether the `1/p` prefix-free coding overhead is charged.
///
/// With synchronized entropy-coder clocks the overhead disappears, which is
/// the `Omitted` convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PrefixCost {
    #[default]
    Included,
    Omitted,
}

fn check_dimension(p: usize) -> Result<()> {
    if p == 0 {
        Err(Error::ZeroDimension)
    } else {
        Ok(())
    }
}

/// `(2/p) ln Gamma(p/2 + 1)`, i.e. the log of `Gamma(p/2+1)^{2/p}`.
fn log_gamma_power(p: f64) -> f64 {
    2.0 / p * ln_gamma(p / 2.0 + 1.0)
}

/// Largest `p` for which `Gamma(p/2 + 1)` is formed as a finite product.
const EXACT_GAMMA_MAX_P: usize = 300;

/// `G(S_p) = Gamma(p/2 + 1)^{2/p} / ((p + 2) pi)`.
///
/// For small `p` the half-integer gamma is expanded as a product with the
/// `sqrt(pi)` factor pulled out, which makes `g_sphere(1)` exactly `1/12`.
pub fn g_sphere(p: usize) -> Result<f64> {
    check_dimension(p)?;
    let pf = p as f64;
    if p > EXACT_GAMMA_MAX_P {
        return Ok(log_gamma_power(pf).exp() / ((pf + 2.0) * PI));
    }
    // Gamma(p/2 + 1) = prod * sqrt(pi)^{p odd}
    let prod: f64 = if p % 2 == 0 {
        (1..=p / 2).map(|j| j as f64).product()
    } else {
        (0..=p / 2).map(|j| j as f64 + 0.5).product()
    };
    let pi_power = if p % 2 == 0 { -1.0 } else { 1.0 / pf - 1.0 };
    Ok(prod.powf(2.0 / pf) * PI.powf(pi_power) / (pf + 2.0))
}

/// Zador's upper bound `Gamma(p/2 + 1)^{2/p} Gamma(1 + 2/p) / (p pi)`.
pub fn g_zador_upper(p: usize) -> Result<f64> {
    check_dimension(p)?;
    let pf = p as f64;
    Ok((log_gamma_power(pf) + ln_gamma(1.0 + 2.0 / pf)).exp() / (pf * PI))
}

/// Tabulated `G_p` for lattices with known constants.
pub fn g_known(mode: LatticeMode, p: usize) -> Result<f64> {
    match (mode, p) {
        (LatticeMode::Scalar, 1) => Ok(G_SCALAR),
        (LatticeMode::Leech, 24) => Ok(G_LEECH),
        _ => Err(Error::UnknownLattice {
            mode: mode.name().to_string(),
            p,
        }),
    }
}

/// Rate loss of ECDQ over the Gaussian lower bound, in bits per dimension:
/// `1/2 log2(2 pi e G_p) + 1/p`.
pub fn ecdq_gap(p: usize, g: f64, prefix: PrefixCost) -> Result<f64> {
    check_dimension(p)?;
    if !(g >= G_GAUSSIAN_FLOOR) {
        return Err(Error::BelowGaussianFloor { g });
    }
    let shape_loss = 0.5 * (2.0 * PI * E * g).log2();
    Ok(match prefix {
        PrefixCost::Included => shape_loss + 1.0 / p as f64,
        PrefixCost::Omitted => shape_loss,
    })
}

impl LatticeSpec {
    pub fn gap(&self, prefix: PrefixCost) -> Result<f64> {
        ecdq_gap(self.p, self.g, prefix)
    }

    /// `4^{1/p} (2 pi e G_p)`, equivalently `2^{2 gap}`: the factor by which
    /// the lattice inflates the coding noise in the achievable cost bounds.
    pub fn inflation(&self, prefix: PrefixCost) -> Result<f64> {
        Ok((2.0 * self.gap(prefix)?).exp2())
    }
}

/// Achievable per-step rates `R_t^* + gap`.
pub fn upper_rates(schedule: &Schedule, lattice: &LatticeSpec, prefix: PrefixCost) -> Result<Vec<f64>> {
    lattice.validate()?;
    let gap = lattice.gap(prefix)?;
    Ok(schedule.r.iter().map(|r| r + gap).collect())
}

/// Steady-state achievable rate `R_inf^* + gap`.
pub fn steady_upper(
    alpha: f64,
    sigma_w2: f64,
    d: f64,
    lattice: &LatticeSpec,
    prefix: PrefixCost,
) -> Result<f64> {
    lattice.validate()?;
    Ok(waterfill::steady_state_rate(alpha, sigma_w2, d)? + lattice.gap(prefix)?)
}
