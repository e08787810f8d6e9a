//! Plug-in entropy estimates of quantizer index streams.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Minimum number of samples per step for [`empirical_entropy`].
pub const MIN_SAMPLES: usize = 1_000;

/// Number of cells the dither phase is split into when estimating the
/// dither-conditioned entropy.
pub const DITHER_PHASE_CELLS: usize = 32;

/// Entropy in bits of the empirical distribution given by `counts`.
pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Plug-in entropy (bits per symbol) of each step's index stream.
pub fn empirical_entropy(streams: &[Vec<i64>]) -> Result<Vec<f64>> {
    streams
        .iter()
        .enumerate()
        .map(|(i, stream)| {
            if stream.len() < MIN_SAMPLES {
                return Err(Error::InsufficientSamples {
                    step: i + 1,
                    got: stream.len(),
                    required: MIN_SAMPLES,
                });
            }
            let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
            for &k in stream {
                *counts.entry(k).or_default() += 1;
            }
            Ok(entropy_of_counts(counts.into_values()))
        })
        .collect()
}

/// Index counts for one step, kept both overall and per dither-phase cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexHistogram {
    pub counts: BTreeMap<i64, u64>,
    pub by_phase: Vec<BTreeMap<i64, u64>>,
}

impl Default for IndexHistogram {
    fn default() -> Self {
        IndexHistogram {
            counts: BTreeMap::new(),
            by_phase: vec![BTreeMap::new(); DITHER_PHASE_CELLS],
        }
    }
}

impl IndexHistogram {
    pub fn record(&mut self, phase_cell: usize, index: i64) {
        *self.counts.entry(index).or_default() += 1;
        *self.by_phase[phase_cell].entry(index).or_default() += 1;
    }

    pub fn samples(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Entropy of the index marginalized over the dither.
    pub fn marginal_entropy(&self) -> f64 {
        entropy_of_counts(self.counts.values().copied())
    }

    /// Entropy of the index given the dither phase cell, `sum_c P(c) H(Q | c)`.
    pub fn conditional_entropy(&self) -> f64 {
        let total = self.samples() as f64;
        if total == 0.0 {
            return 0.0;
        }
        self.by_phase
            .iter()
            .map(|cell| {
                let n: u64 = cell.values().sum();
                n as f64 / total * entropy_of_counts(cell.values().copied())
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream_has_zero_entropy() {
        let h = empirical_entropy(&[vec![7; 2000]]).unwrap();
        assert_eq!(h, vec![0.0]);
    }

    #[test]
    fn uniform_stream_has_k_bits() {
        for k in 1..=6u32 {
            let symbols = 1i64 << k;
            let stream: Vec<i64> = (0..symbols * 500).map(|i| i % symbols).collect();
            let h = empirical_entropy(&[stream]).unwrap()[0];
            assert!((h - k as f64).abs() < 0.01, "{k}: {h}");
        }
    }

    #[test]
    fn short_stream_is_rejected() {
        let err = empirical_entropy(&[vec![0; 2000], vec![0; 10]]).unwrap_err();
        assert_eq!(err, Error::InsufficientSamples { step: 2, got: 10, required: MIN_SAMPLES });
    }

    #[test]
    fn conditioning_never_increases_entropy() {
        let mut hist = IndexHistogram::default();
        for i in 0..4000i64 {
            let cell = (i % 32) as usize;
            hist.record(cell, (i % 3) + (cell as i64 / 16));
        }
        assert!(hist.conditional_entropy() <= hist.marginal_entropy() + 1e-12);
    }
}
