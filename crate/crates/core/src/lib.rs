//! Rate and LQG-cost bounds for parallel time-varying Gauss–Markov sources.
//!
//! * [`waterfill`] solves the causal rate-distortion problem by dynamic
//!   reverse-waterfilling over time.
//! * [`lattice`] supplies quantizer constants and the ECDQ rate gap that turns
//!   the converse into an achievable rate.
//! * [`lqg`] maps rates to LQG cost bounds via the Riccati recursion.
//! * [`simulator`] checks the bounds by Monte-Carlo DPCM runs.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod lqg;
pub mod model;
pub mod simulator;
pub mod waterfill;

pub use error::{Error, Result};
pub use lattice::{ecdq_gap, g_sphere, g_zador_upper, PrefixCost, G_GAUSSIAN_FLOOR, G_LEECH, G_SCALAR};
pub use lqg::{lqg_bounds, riccati, steady_state_cost, steady_state_lqg, Riccati, SteadyStateLqg};
pub use model::{
    rate_from_variances, ControlModel, LatticeMode, LatticeSpec, LqgSolution, Schedule, SourceModel,
    TimeInvariantPlant,
};
pub use simulator::{simulate_control, simulate_estimation, SimMode, SimReport, Verdict};
pub use waterfill::{solve, steady_state_rate, DEFAULT_EPS};
