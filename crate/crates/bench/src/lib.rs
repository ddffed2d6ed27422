//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use smcf_core::data::gaussian;
use smcf_core::{Field, Grid};

/// The small-data Gaussian used throughout the test suite, on an
/// `n^d` grid over `[0, 2π)^d`.
pub fn reference_data(d: usize, n: usize) -> Field {
    let grid = Grid::new(d, n, 2.0 * PI).expect("valid grid");
    let mut modulation = vec![0.0; d];
    modulation[0] = 1.0;
    gaussian(&grid, 1e-2, 0.8, &modulation, 2.0).expect("valid data")
}
