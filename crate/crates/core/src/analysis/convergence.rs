//! Error tables against manufactured solutions.

use std::sync::Arc;

use serde::Serialize;

use crate::dynamics::manufactured::{ManufacturedForcing, ManufacturedSolution, SpatialProfile};
use crate::dynamics::{simulate, MemoryMode, RhsConfig, SimulationConfig};
use crate::error::{Error, Result};
use crate::spectral::Grid;
use crate::state::{HistoryConfig, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// Step size or points per axis.
    pub resolution: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `error_i / error_{i+1}`.
    pub ratios: Vec<f64>,
}

impl ConvergenceTable {
    fn new(rows: Vec<ConvergenceRow>) -> Self {
        let ratios = rows.windows(2).map(|w| w[0].error / w[1].error).collect();
        Self { rows, ratios }
    }

    /// Observed orders `log2` of the ratios (meaningful for halved step sizes).
    pub fn orders(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| r.log2()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyConfig {
    pub profile: SpatialProfile,
    pub amplitude: f64,
    pub omega: f64,
    pub horizon: f64,
    pub memory_mode: MemoryMode,
    pub nonlinear: bool,
    /// History grid used in Dafermos mode.
    pub n_s: usize,
    pub s_max: f64,
}

fn history(config: &StudyConfig) -> HistoryConfig {
    match config.memory_mode {
        MemoryMode::Dafermos => HistoryConfig::Dafermos {
            n_s: config.n_s,
            s_max: config.s_max,
        },
        MemoryMode::Closure => HistoryConfig::Closure,
    }
}

/// `L²` error in `(ψ, v, w)` at the horizon.
pub fn manufactured_error(params: &SystemParams, grid: &Arc<Grid>, dt: f64, config: &StudyConfig) -> Result<f64> {
    let sol = ManufacturedSolution::new(grid, config.profile, config.amplitude, config.omega);
    let initial = sol.initial_state(params, &history(config))?;
    let forcing = ManufacturedForcing {
        solution: &sol,
        params,
        nonlinear: config.nonlinear,
    };
    let rhs = if config.nonlinear {
        RhsConfig::nonlinear(config.memory_mode)
    } else {
        RhsConfig::linear(config.memory_mode)
    };
    let sim = SimulationConfig::new(config.horizon, dt, rhs);
    let out = simulate(params, initial, &sim, &forcing, &mut [])?;
    if let Some(b) = out.blowup {
        return Err(Error::BlowUp { t: b.t });
    }
    let t = out.t;
    let e = |n: u32, f: &crate::spectral::Field| f.lin_comb(1.0, &sol.derivative(n, t), -1.0).l2_norm();
    Ok((e(0, &out.state.psi).powi(2) + e(1, &out.state.v).powi(2) + e(2, &out.state.w).powi(2)).sqrt())
}

/// Errors for a sequence of step sizes on a fixed grid.
pub fn temporal_study(
    params: &SystemParams,
    grid: &Arc<Grid>,
    dts: &[f64],
    config: &StudyConfig,
) -> Result<ConvergenceTable> {
    let rows = dts
        .iter()
        .map(|&dt| {
            Ok(ConvergenceRow {
                resolution: dt,
                error: manufactured_error(params, grid, dt, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::new(rows))
}

/// Errors for a sequence of 1D grids of length `length` at a fixed small step.
pub fn spatial_study(
    params: &SystemParams,
    points: &[usize],
    length: f64,
    dt: f64,
    config: &StudyConfig,
) -> Result<ConvergenceTable> {
    let rows = points
        .iter()
        .map(|&n| {
            let grid = Grid::cube(1, n, length)?;
            Ok(ConvergenceRow {
                resolution: n as f64,
                error: manufactured_error(params, &grid, dt, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::new(rows))
}
