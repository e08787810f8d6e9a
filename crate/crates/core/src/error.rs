use thiserror::Error;

/// Errors produced by the solvers and validators.
///
/// Step indices carried in variants are 1-based, matching the public API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("horizon n must be at least 1")]
    EmptyHorizon,

    #[error("dimension p must be at least 1")]
    ZeroDimension,

    #[error("length mismatch: `{field}` has {got} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("`{field}` at step {step} is not finite ({value})")]
    NonFinite {
        field: &'static str,
        step: usize,
        value: f64,
    },

    #[error("non-positive variance: `{field}` at step {step} is {value}")]
    NonPositiveVariance {
        field: &'static str,
        step: usize,
        value: f64,
    },

    #[error("zero input gain: beta at step {step}")]
    ZeroInputGain { step: usize },

    #[error("non-positive input penalty: N at step {step} is {value}")]
    NonPositiveInputPenalty { step: usize, value: f64 },

    #[error("negative state penalty: Q at step {step} is {value}")]
    NegativeStatePenalty { step: usize, value: f64 },

    #[error("invalid argument `{name}` = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("step {step} is outside 1..={n}")]
    StepOutOfRange { step: usize, n: usize },

    #[error(
        "infeasible rate at step {step}: {rate} bits does not exceed the stability floor {floor} bits"
    )]
    BelowStabilityFloor { step: usize, rate: f64, floor: f64 },

    #[error("cost {cost} at step {step} is not above the communication-free floor {floor}")]
    CostAtFloor { step: usize, cost: f64, floor: f64 },

    #[error("rate-cost inverse is undefined at the final step {step}")]
    TerminalStep { step: usize },

    #[error("failed to bracket the multiplier: {0}")]
    Bracket(String),

    #[error("bisection did not converge after {iterations} iterations (theta {theta:e}, residual {residual:e})")]
    NotConverged {
        iterations: usize,
        theta: f64,
        residual: f64,
    },

    #[error("lattice `{mode}` is not tabulated for p = {p}")]
    UnknownLattice { mode: String, p: usize },

    #[error("G = {g} is below the Gaussian floor 1/(2 pi e)")]
    BelowGaussianFloor { g: f64 },

    #[error("parameters are not time-invariant: `{field}` varies")]
    NotTimeInvariant { field: &'static str },

    #[error("schedule does not match model: {0}")]
    ScheduleMismatch(String),

    #[error("insufficient samples at step {step}: {got} < {required}")]
    InsufficientSamples {
        step: usize,
        got: usize,
        required: usize,
    },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
