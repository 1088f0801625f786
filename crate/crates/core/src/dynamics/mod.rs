//! Right-hand side of the first-order system and its time integration.
//!
//! ```text
//! ψ_t = v,  v_t = w,
//! τ w_t = −w + c_g²Δψ + bΔv + ∫ g Δη ds + 2(k v w + ∇ψ·∇v) + S,
//! η_t = v − η_s            (Dafermos)
//! M_t = mass·v − M/τ_r     (closure)
//! ```
//!
//! The explicit fourth-order Runge–Kutta step is stable for
//! `dt·sqrt(b/τ)·|ξ|_max ≲ 2.8` (the high-frequency part of the system is
//! a damped wave) and, in Dafermos mode, `dt ≤ Δs` for the upwind transport.

pub mod manufactured;
pub mod simulate;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::spectral::{Field, Grid, Spectrum, Tensor};
use crate::state::{ClosureMoment, History, HistoryField, StateVector, SystemParams};

pub use simulate::{simulate, BlowUp, Observer, SimulationConfig, SimulationOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryMode {
    #[default]
    Dafermos,
    Closure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhsConfig {
    pub memory_mode: MemoryMode,
    /// Include `2(k v w + ∇ψ·∇v)`.
    pub nonlinear: bool,
    /// Apply the 2/3 rule to the quadratic terms.
    pub dealias: bool,
}

impl Default for RhsConfig {
    fn default() -> Self {
        Self {
            memory_mode: MemoryMode::Dafermos,
            nonlinear: true,
            dealias: false,
        }
    }
}

impl RhsConfig {
    pub fn linear(memory_mode: MemoryMode) -> Self {
        Self {
            memory_mode,
            nonlinear: false,
            dealias: false,
        }
    }

    pub fn nonlinear(memory_mode: MemoryMode) -> Self {
        Self {
            memory_mode,
            nonlinear: true,
            dealias: false,
        }
    }

    fn check(&self, state: &StateVector, kernel: &MemoryKernel) -> Result<()> {
        match (&state.history, self.memory_mode) {
            (History::Dafermos(_), MemoryMode::Dafermos) => Ok(()),
            (History::Closure(_), MemoryMode::Closure) if kernel.has_closure() => Ok(()),
            (History::Closure(_), MemoryMode::Closure) => Err(Error::ClosureRequiresExponential),
            _ => Err(Error::InvalidArgument(
                "state history does not match the configured memory mode".into(),
            )),
        }
    }
}

/// External source added to `τ w_t`.
pub trait Forcing {
    fn source(&self, t: f64) -> Result<Option<Field>>;
}

/// No source term.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unforced;

impl Forcing for Unforced {
    fn source(&self, _t: f64) -> Result<Option<Field>> {
        Ok(None)
    }
}

/// `∫₀^∞ g(s) Δη(s) ds`.
pub fn memory_term(state: &StateVector, kernel: &MemoryKernel) -> Result<Field> {
    if matches!(state.history, History::Closure(_)) && !kernel.has_closure() {
        return Err(Error::ClosureRequiresExponential);
    }
    state.memory_moment().laplacian()
}

/// The base nonlinearity `F⁽⁰⁾ = 2k v w + 2∇ψ·∇v`.
pub fn nonlinear_term(psi: &Field, v: &Field, w: &Field, k: f64, dealias: bool) -> Result<Field> {
    let grid = psi.grid();
    let psi_h = psi.forward()?;
    let v_h = v.forward()?;
    let prep = |s: Spectrum| if dealias { s.dealiased() } else { s };
    let (v_f, w_f) = if dealias {
        (prep(v_h.clone()).inverse(), prep(w.forward()?).inverse())
    } else {
        (v.clone(), w.clone())
    };
    let mut out = Field::zeros(grid);
    {
        let o = out.values_mut();
        for ((x, a), b) in o.iter_mut().zip(v_f.values()).zip(w_f.values()) {
            *x = 2.0 * k * a * b;
        }
    }
    for axis in 0..grid.dim() {
        let dpsi = prep(psi_h.derivative(axis)).inverse();
        let dv = prep(v_h.derivative(axis)).inverse();
        for ((x, a), b) in out.values_mut().iter_mut().zip(dpsi.values()).zip(dv.values()) {
            *x += 2.0 * a * b;
        }
    }
    if dealias {
        out = out.forward()?.dealiased().inverse();
    }
    Ok(out)
}

/// Time derivative of the state at time `t`; `source` is added to `τ w_t`.
pub fn rhs(
    state: &StateVector,
    params: &SystemParams,
    config: &RhsConfig,
    t: f64,
    source: Option<&Field>,
) -> Result<StateVector> {
    config.check(state, params.kernel())?;
    let grid = state.grid();
    let tau = params.tau();

    let mut combo = state.psi.scaled(params.cg2());
    combo.axpy(params.b(), &state.v);
    combo.axpy(1.0, &state.memory_moment());
    let mut w_t = combo.laplacian().map_err(|_| Error::BlowUp { t })?;
    w_t.axpy(-1.0, &state.w);
    if config.nonlinear {
        let nl = nonlinear_term(&state.psi, &state.v, &state.w, params.k(), config.dealias)
            .map_err(|_| Error::BlowUp { t })?;
        w_t.axpy(1.0, &nl);
    }
    if let Some(s) = source {
        w_t.axpy(1.0, s);
    }
    w_t.scale(1.0 / tau);

    let history = match &state.history {
        History::Dafermos(h) => History::Dafermos(transport(h, &state.v)),
        History::Closure(c) => {
            let mut m = state.v.scaled(c.mass);
            m.axpy(-c.rate, &c.moment);
            History::Closure(ClosureMoment {
                moment: m,
                mass: c.mass,
                rate: c.rate,
            })
        }
    };
    let out = StateVector {
        psi: state.v.clone(),
        v: state.w.clone(),
        w: w_t,
        history,
    };
    if !out.w.is_finite() {
        return Err(Error::BlowUp { t });
    }
    debug_assert!(Arc::ptr_eq(out.grid(), grid) || **out.grid() == **grid);
    Ok(out)
}

/// `v − (η_j − η_{j−1})/Δs` at every node `j ≥ 1`, with `η_0 = 0`.
fn transport(h: &HistoryField, v: &Field) -> HistoryField {
    let mut out = h.clone();
    let inv_ds = 1.0 / h.weights().grid().ds();
    let n = h.grid().len();
    let src = h.values();
    let dst = out.values_mut();
    let vv = v.values();
    for i in 0..n {
        dst[i] = vv[i] - src[i] * inv_ds;
    }
    for j in 1..h.n_s() {
        let (prev, cur) = (&src[(j - 1) * n..j * n], &src[j * n..(j + 1) * n]);
        let d = &mut dst[j * n..(j + 1) * n];
        for i in 0..n {
            d[i] = vv[i] - (cur[i] - prev[i]) * inv_ds;
        }
    }
    out
}

/// `F^(κ)` assembled from explicit commutators:
///
/// ```text
/// F^(κ) = 2k[∇^κ, v]w + 2k v ∇^κ w + 2[∇^κ, ∇ψ]·∇v + 2∇ψ·∇(∇^κ v)
/// ```
///
/// Returned as a tensor of order `κ ∈ {0, 1, 2}`.
pub fn nonlinearity_kappa(state: &StateVector, k: f64, kappa: usize) -> Result<Tensor> {
    let grid = Arc::clone(state.grid());
    let dim = grid.dim();
    let (psi, v, w) = (&state.psi, &state.v, &state.w);
    if kappa == 0 {
        return Tensor::new(0, dim, vec![nonlinear_term(psi, v, w, k, false)?]);
    }
    if kappa > 2 {
        return Err(Error::InvalidOrder {
            order: kappa,
            allowed: "0, 1 or 2",
        });
    }
    let dpsi = psi.gradient()?;
    let dv = v.gradient()?;
    let dw = w.gradient()?;
    let hpsi = psi.partials_tensor(2)?;
    let hv = v.partials_tensor(2)?;
    let acc = |terms: &[(f64, &Field, &Field)]| -> Field {
        let mut out = Field::zeros(&grid);
        for (c, a, b) in terms {
            for ((o, x), y) in out.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
                *o += c * x * y;
            }
        }
        out
    };
    let components = if kappa == 1 {
        (0..dim)
            .map(|i| {
                let mut terms = vec![(2.0 * k, &dv[i], w), (2.0 * k, v, &dw[i])];
                for l in 0..dim {
                    terms.push((2.0, hpsi.component(&[i, l]), &dv[l]));
                    terms.push((2.0, &dpsi[l], hv.component(&[l, i])));
                }
                acc(&terms)
            })
            .collect()
    } else {
        let hw = w.partials_tensor(2)?;
        let third_psi: Vec<Tensor> = dpsi
            .iter()
            .map(|f| f.partials_tensor(2))
            .collect::<Result<_>>()?;
        let third_v: Vec<Tensor> = dv
            .iter()
            .map(|f| f.partials_tensor(2))
            .collect::<Result<_>>()?;
        let mut comps = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut terms = vec![
                    (2.0 * k, hv.component(&[i, j]), w),
                    (2.0 * k, &dv[i], &dw[j]),
                    (2.0 * k, &dv[j], &dw[i]),
                    (2.0 * k, v, hw.component(&[i, j])),
                ];
                for l in 0..dim {
                    terms.push((2.0, third_psi[l].component(&[i, j]), &dv[l]));
                    terms.push((2.0, hpsi.component(&[i, l]), hv.component(&[j, l])));
                    terms.push((2.0, hpsi.component(&[j, l]), hv.component(&[i, l])));
                    terms.push((2.0, &dpsi[l], third_v[l].component(&[i, j])));
                }
                comps.push(acc(&terms));
            }
        }
        comps
    };
    Tensor::new(kappa, dim, components)
}

/// Checks the step size against the history spacing.
pub fn check_time_step(state: &StateVector, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep {
            dt,
            reason: "must be positive".into(),
        });
    }
    if let History::Dafermos(h) = &state.history {
        let ds = h.weights().grid().ds();
        if dt > ds * (1.0 + 1e-12) {
            return Err(Error::InvalidTimeStep {
                dt,
                reason: format!("exceeds the history spacing {ds}"),
            });
        }
    }
    Ok(())
}

/// One classical RK4 step from `t` to `t + dt`.
pub fn step(
    state: &StateVector,
    params: &SystemParams,
    config: &RhsConfig,
    t: f64,
    dt: f64,
    forcing: &dyn Forcing,
) -> Result<StateVector> {
    check_time_step(state, dt)?;
    let half = 0.5 * dt;
    let s0 = forcing.source(t)?;
    let s_half = forcing.source(t + half)?;
    let s1 = forcing.source(t + dt)?;

    let k1 = rhs(state, params, config, t, s0.as_ref())?;
    let k2 = rhs(&state.combine(&[(half, &k1)]), params, config, t + half, s_half.as_ref())?;
    let k3 = rhs(&state.combine(&[(half, &k2)]), params, config, t + half, s_half.as_ref())?;
    let k4 = rhs(&state.combine(&[(dt, &k3)]), params, config, t + dt, s1.as_ref())?;

    let out = state.combine(&[(dt / 6.0, &k1), (dt / 3.0, &k2), (dt / 3.0, &k3), (dt / 6.0, &k4)]);
    if !out.fields_finite() {
        return Err(Error::BlowUp { t: t + dt });
    }
    Ok(out)
}

/// Growth proxy `‖∇ψ‖² + ‖v‖² + ‖∇v‖² + ‖w‖²` used for blow-up detection.
pub fn growth_proxy(state: &StateVector) -> Result<f64> {
    let psi = state.psi.forward()?;
    let v = state.v.forward()?;
    Ok(psi.homogeneous_norm_sq(1)
        + v.homogeneous_norm_sq(0)
        + v.homogeneous_norm_sq(1)
        + state.w.l2_norm().powi(2))
}

/// Largest `|ξ|` carried by the grid.
pub fn max_wavenumber(grid: &Grid) -> f64 {
    grid.xi2_table().iter().fold(0.0f64, |m, &x| m.max(x)).sqrt()
}

/// Step size meeting the wave bound `dt·sqrt(b/τ)·|ξ|_max ≤ cfl`.
pub fn stable_time_step(params: &SystemParams, grid: &Grid, cfl: f64) -> f64 {
    let omega = (params.b() / params.tau()).sqrt() * max_wavenumber(grid)
        + params.cg2().sqrt()
        + 1.0 / params.tau();
    cfl / omega
}
