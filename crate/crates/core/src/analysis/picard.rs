//! Fixed-point iteration for the mild solution
//! `Φ ↦ e^{t𝒜}Ψ₀ + ∫₀^t e^{(t−r)𝒜} 𝔽(Φ(r)) dr`.
//!
//! Each iterate is a linear RK4 run driven by the nonlinearity of the previous
//! iterate, stored at the step times and interpolated by cubic Lagrange
//! polynomials at the half steps.

use serde::Serialize;

use crate::dynamics::{nonlinear_term, simulate, step, Forcing, MemoryMode, RhsConfig, SimulationConfig, Unforced};
use crate::energy::Snapshot;
use crate::error::{Error, Result};
use crate::spectral::Field;
use crate::state::{StateVector, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PicardConfig {
    pub horizon: f64,
    pub dt: f64,
    /// Stop once the sup-in-time difference falls below `tol · sup‖Φ‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Order of the standard norm measuring differences.
    pub m: u32,
    pub memory_mode: MemoryMode,
}

impl PicardConfig {
    pub fn new(horizon: f64, dt: f64) -> Self {
        Self {
            horizon,
            dt,
            tol: 1e-12,
            max_iter: 30,
            m: 1,
            memory_mode: MemoryMode::Dafermos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardResult {
    pub iterations: usize,
    /// `sup_t ‖Φ_{n+1} − Φ_n‖` for each iterate.
    pub differences: Vec<f64>,
    /// Last observed ratio of successive differences.
    pub q: Option<f64>,
    pub converged: bool,
}

/// Source values at uniform times, read back with cubic Lagrange interpolation.
struct SampledSource<'a> {
    dt: f64,
    fields: &'a [Field],
}

impl Forcing for SampledSource<'_> {
    fn source(&self, t: f64) -> Result<Option<Field>> {
        let n = self.fields.len();
        let x = t / self.dt;
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 && nearest >= 0.0 && (nearest as usize) < n {
            return Ok(Some(self.fields[nearest as usize].clone()));
        }
        if n < 4 {
            return Err(Error::InvalidArgument("need at least four stored sources".into()));
        }
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let nodes: Vec<f64> = (base..base + 4).map(|i| i as f64).collect();
        let mut out = Field::zeros(self.fields[0].grid());
        for (a, &xa) in nodes.iter().enumerate() {
            let l: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &xb)| (x - xb) / (xa - xb))
                .product();
            out.axpy(l, &self.fields[base + a]);
        }
        Ok(Some(out))
    }
}

fn uniform_steps(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(horizon.is_finite() && horizon > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon {horizon}, dt {dt}")));
    }
    let steps = (horizon / dt).round().max(3.0) as usize;
    Ok((steps, horizon / steps as f64))
}

fn difference_norm(a: &StateVector, b: &StateVector, params: &SystemParams, m: u32) -> Result<f64> {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    let with_history = d.history_resolved();
    Ok(Snapshot::new(&d, params)?.standard_norm_sq(m, with_history)?.sqrt())
}

/// Runs the iteration from `Φ₀ ≡ Ψ₀`; returns the report and the last iterate
/// at every step time.
pub fn picard_solve(
    params: &SystemParams,
    initial: &StateVector,
    config: &PicardConfig,
) -> Result<(PicardResult, Vec<StateVector>)> {
    let (steps, dt) = uniform_steps(config.horizon, config.dt)?;
    let linear = RhsConfig::linear(config.memory_mode);
    let mut phi = vec![initial.clone(); steps + 1];
    let mut result = PicardResult {
        iterations: 0,
        differences: Vec::new(),
        q: None,
        converged: false,
    };
    while result.iterations < config.max_iter {
        let sources = phi
            .iter()
            .map(|s| nonlinear_term(&s.psi, &s.v, &s.w, params.k(), false))
            .collect::<Result<Vec<_>>>()?;
        let forcing = SampledSource { dt, fields: &sources };
        let mut next = Vec::with_capacity(steps + 1);
        next.push(initial.clone());
        for i in 0..steps {
            let s = step(&next[i], params, &linear, i as f64 * dt, dt, &forcing)?;
            next.push(s);
        }
        let mut diff = 0.0f64;
        let mut size = 0.0f64;
        for (a, b) in next.iter().zip(&phi) {
            diff = diff.max(difference_norm(a, b, params, config.m)?);
            let mut z = a.clone();
            z.scale(0.0);
            size = size.max(difference_norm(a, &z, params, config.m)?);
        }
        result.iterations += 1;
        if let Some(&prev) = result.differences.last() {
            result.q = Some(if prev > 0.0 { diff / prev } else { 0.0 });
        }
        result.differences.push(diff);
        phi = next;
        let target = config.tol * size.max(f64::MIN_POSITIVE);
        if diff <= target {
            let k = result.differences.len();
            let recent_ok = result.differences[k.saturating_sub(3)..]
                .windows(2)
                .all(|w| w[1] <= w[0]);
            result.converged = recent_ok;
            break;
        }
    }
    if result.differences.last() == Some(&0.0) && result.q.is_none() {
        result.q = Some(0.0);
    }
    Ok((result, phi))
}

/// `sup_t` of the `L²` distance in `(ψ, v, w)` between the Picard fixed point
/// and a direct nonlinear RK4 run with the same step.
pub fn picard_vs_direct(
    params: &SystemParams,
    initial: &StateVector,
    config: &PicardConfig,
    fixed_point: &[StateVector],
) -> Result<f64> {
    let (steps, dt) = uniform_steps(config.horizon, config.dt)?;
    if fixed_point.len() != steps + 1 {
        return Err(Error::InvalidArgument("fixed point does not match the step grid".into()));
    }
    let mut direct = Vec::with_capacity(steps + 1);
    let sim = SimulationConfig::new(steps as f64 * dt, dt, RhsConfig::nonlinear(config.memory_mode));
    let mut obs = |_t: f64, s: &StateVector| -> Result<()> {
        direct.push(s.clone());
        Ok(())
    };
    let outcome = simulate(params, initial.clone(), &sim, &Unforced, &mut [&mut obs])?;
    if let Some(b) = outcome.blowup {
        return Err(Error::BlowUp { t: b.t });
    }
    let mut worst = 0.0f64;
    for (a, b) in direct.iter().zip(fixed_point) {
        let d = (a.psi.lin_comb(1.0, &b.psi, -1.0).l2_norm().powi(2)
            + a.v.lin_comb(1.0, &b.v, -1.0).l2_norm().powi(2)
            + a.w.lin_comb(1.0, &b.w, -1.0).l2_norm().powi(2))
        .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MemoryKernel;
    use crate::spectral::Grid;
    use crate::state::{init_state, HistoryConfig};
    use std::f64::consts::PI;

    fn params() -> SystemParams {
        SystemParams::new(1.0, 1.5, 1.0, 1.0, MemoryKernel::exponential(0.2, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = Grid::cube(1, 8, 1.0).unwrap();
        let f = |t: f64| t * t * t - t + 2.0;
        let fields: Vec<Field> = (0..6).map(|i| Field::constant(&g, f(i as f64 * 0.1))).collect();
        let src = SampledSource { dt: 0.1, fields: &fields };
        for t in [0.05, 0.15, 0.25, 0.45] {
            let v = src.source(t).unwrap().unwrap().values()[0];
            assert!((v - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_data_is_a_fixed_point_after_one_iterate() {
        let p = params();
        let g = Grid::cube(1, 16, 2.0 * PI).unwrap();
        let z = Field::zeros(&g);
        let s = init_state(&p, &z, &z, &z, &HistoryConfig::Closure).unwrap();
        let mut cfg = PicardConfig::new(0.1, 0.01);
        cfg.memory_mode = MemoryMode::Closure;
        let (r, _) = picard_solve(&p, &s, &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.differences, vec![0.0]);
    }

    #[test]
    fn small_data_contracts_and_matches_direct_run() {
        let p = params();
        let g = Grid::cube(1, 32, 2.0 * PI).unwrap();
        let psi = Field::from_fn(&g, |x| 0.1 * x[0].sin());
        let v = Field::from_fn(&g, |x| 0.1 * (2.0 * x[0]).cos());
        let z = Field::zeros(&g);
        let s = init_state(&p, &psi, &v, &z, &HistoryConfig::Closure).unwrap();
        let mut cfg = PicardConfig::new(0.25, 0.01);
        cfg.memory_mode = MemoryMode::Closure;
        let (r, fp) = picard_solve(&p, &s, &cfg).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.q.unwrap() < 1.0);
        assert!(picard_vs_direct(&p, &s, &cfg, &fp).unwrap() < 1e-5);
    }
}
