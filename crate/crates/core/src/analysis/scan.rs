//! Decay rates over a grid of `(b / τc², kernel mass)`.

use rayon::prelude::*;
use serde::Serialize;

use super::decay::fit_decay;
use crate::dynamics::{simulate, MemoryMode, RhsConfig, SimulationConfig, Unforced};
use crate::energy::EnergyObserver;
use crate::error::Result;
use crate::kernel::MemoryKernel;
use crate::spectral::Field;
use crate::state::{init_state, HistoryConfig, Regime, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub tau: f64,
    pub c2: f64,
    pub k: f64,
    pub tau_r: f64,
    pub horizon: f64,
    pub dt: f64,
    pub stride: usize,
    pub history: HistoryConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub b_ratio: f64,
    pub mass: f64,
    pub b: f64,
    pub regime: Regime,
    /// Fitted rate of `E1^(0)`; `None` when the fit is impossible.
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    /// `E1^(0)` never increased by more than `1e−9` relative between samples.
    pub nonincreasing: bool,
}

fn scan_point(
    config: &ScanConfig,
    b_ratio: f64,
    mass: f64,
    data: &(Field, Field, Field),
) -> Result<ScanRow> {
    let b = b_ratio * config.tau * config.c2;
    let kernel = if mass == 0.0 {
        MemoryKernel::Memoryless
    } else {
        MemoryKernel::exponential(mass / (config.c2 * config.tau_r), config.c2, config.tau_r)?
    };
    let params = SystemParams::new(config.tau, b, config.c2, config.k, kernel)?;
    let (history, mode) = match (config.history, mass == 0.0) {
        (_, true) => (HistoryConfig::Closure, MemoryMode::Closure),
        (h @ HistoryConfig::Dafermos { .. }, false) => (h, MemoryMode::Dafermos),
        (HistoryConfig::Closure, false) => (HistoryConfig::Dafermos { n_s: 256, s_max: 30.0 }, MemoryMode::Dafermos),
    };
    let initial = init_state(&params, &data.0, &data.1, &data.2, &history)?;
    let sim = SimulationConfig::new(config.horizon, config.dt, RhsConfig::linear(mode)).with_stride(config.stride);
    let mut obs = EnergyObserver::new(&params, 0, false);
    simulate(&params, initial, &sim, &Unforced, &mut [&mut obs])?;
    let t = obs.report.times();
    let e = obs.report.series(0, |k| k.e1);
    let scale = e.iter().fold(0.0f64, |m, v| m.max(*v));
    let nonincreasing = e.windows(2).all(|w| w[1] - w[0] <= 1e-9 * scale);
    let fit = fit_decay(&t, &e).ok();
    Ok(ScanRow {
        b_ratio,
        mass,
        b,
        regime: params.regime(),
        rate: fit.map(|f| f.rate),
        r_squared: fit.map(|f| f.r_squared),
        nonincreasing,
    })
}

/// Runs every `(b_ratio, mass)` pair in parallel; rows are ordered by
/// `b_ratio`, then `mass`.
pub fn decay_scan(
    config: &ScanConfig,
    b_ratios: &[f64],
    masses: &[f64],
    data: &(Field, Field, Field),
) -> Result<Vec<ScanRow>> {
    let points: Vec<(f64, f64)> = b_ratios
        .iter()
        .flat_map(|&b| masses.iter().map(move |&m| (b, m)))
        .collect();
    let mut rows = points
        .par_iter()
        .map(|&(b, m)| scan_point(config, b, m, data))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.b_ratio.total_cmp(&y.b_ratio).then(x.mass.total_cmp(&y.mass)));
    Ok(rows)
}
