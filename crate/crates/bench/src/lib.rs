//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use jmgt_core::kernel::MemoryKernel;
use jmgt_core::spectral::{Field, Grid};
use jmgt_core::state::{init_state, HistoryConfig, StateVector, SystemParams};

/// `τ = 1`, `b = 1.5`, `c² = 1`, `k = 1`, exponential kernel of mass `0.2`.
pub fn reference_params() -> SystemParams {
    SystemParams::new(1.0, 1.5, 1.0, 1.0, MemoryKernel::exponential(0.2, 1.0, 1.0).expect("valid kernel"))
        .expect("valid parameters")
}

/// Smooth data on `n` points per axis of a `dim`-dimensional box of side `20π`,
/// with `N_s = 256`, `S_max = 30` history.
pub fn reference_state(dim: usize, n: usize) -> (Arc<Grid>, StateVector) {
    let params = reference_params();
    let grid = Grid::cube(dim, n, 20.0 * PI).expect("valid grid");
    let psi = Field::from_fn(&grid, |x| x.iter().map(|c| (0.3 * c).sin()).sum::<f64>().exp() * 0.01);
    let v = Field::from_fn(&grid, |x| 0.01 * (0.2 * x[0]).cos());
    let w = Field::zeros(&grid);
    let state = init_state(
        &params,
        &psi,
        &v,
        &w,
        &HistoryConfig::Dafermos { n_s: 256, s_max: 30.0 },
    )
    .expect("valid state");
    (grid, state)
}
