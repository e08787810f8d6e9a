//! Shared fixtures for the criterion benches in `benches/`.

use gmbounds_core::{ControlModel, SourceModel, TimeInvariantPlant};

/// Deterministic time-varying source with `alpha_t` spread over `(0, 2)`.
pub fn varying_source(n: usize) -> SourceModel {
    // golden-ratio low-discrepancy sequence, no RNG needed
    let alpha = (0..n).map(|t| 2.0 * ((t as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect();
    SourceModel::new(alpha, vec![1.0; n], 1.0).expect("fixture is valid")
}

pub fn unit_control(n: usize) -> ControlModel {
    ControlModel::time_invariant(n, TimeInvariantPlant::unit(), 1.0).expect("fixture is valid")
}
