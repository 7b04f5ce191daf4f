//! Shared fixtures for the benchmark suite.

use euler_spectra::flow::{CoefficientSequence, FlowConfig};

/// The admissible configuration used throughout the benchmarks.
pub fn reference_coeffs() -> CoefficientSequence {
    CoefficientSequence::from_flow(FlowConfig::new([2, 3], [2, -1]).unwrap(), 128).unwrap()
}
