//! Energies, norms and the trajectory report.
//!
//! Every functional is evaluated on a [`Snapshot`]: the spectra of `ψ, v, w`,
//! the moment `M = Σ_j w_j η_j`, and per-mode history sums
//! `H_w̃(ξ) = Σ_j w̃_j |η̂_j(ξ)|²` for the three weights. A norm
//! `‖∇^κ η‖²_{w̃}` is then `Σ_ξ |ξ|^{2κ} H_w̃(ξ)` times the Plancherel scale.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{nonlinear_term, Observer};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, Spectrum};
use crate::state::{History, HistoryField, HistoryWeight, StateVector, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovWeights {
    pub l1: f64,
    pub l2: f64,
    pub eps: f64,
}

impl Default for LyapunovWeights {
    fn default() -> Self {
        Self {
            l1: 10.0,
            l2: 1.0,
            eps: 0.1,
        }
    }
}

impl LyapunovWeights {
    pub fn new(l1: f64, l2: f64, eps: f64) -> Result<Self> {
        if [l1, l2, eps].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(Self { l1, l2, eps })
        } else {
            Err(Error::InvalidArgument(format!(
                "Lyapunov weights must be positive: L1={l1}, L2={l2}, eps={eps}"
            )))
        }
    }
}

/// Per-mode sums `Σ_j w̃_j Re(â_j conj b̂_j)` for the three history weights.
#[derive(Clone, Debug)]
struct HistoryModes {
    g: Vec<f64>,
    neg_dg: Vec<f64>,
    d2g: Vec<f64>,
}

impl HistoryModes {
    fn zeros(len: usize) -> Self {
        Self {
            g: vec![0.0; len],
            neg_dg: vec![0.0; len],
            d2g: vec![0.0; len],
        }
    }

    fn get(&self, kind: HistoryWeight) -> &[f64] {
        match kind {
            HistoryWeight::G => &self.g,
            HistoryWeight::NegDg => &self.neg_dg,
            HistoryWeight::D2g => &self.d2g,
        }
    }
}

fn node_spectrum(h: &HistoryField, j: usize) -> Result<Vec<Complex64>> {
    Ok(h.node_field(j).forward()?.coeffs().to_vec())
}

fn history_modes(a: &HistoryField, b: Option<&HistoryField>) -> Result<HistoryModes> {
    let len = a.grid().len();
    let weights = a.weights();
    let (wg, wd, wdd) = (
        weights.get(HistoryWeight::G),
        weights.get(HistoryWeight::NegDg),
        weights.get(HistoryWeight::D2g),
    );
    let products: Vec<Vec<f64>> = (1..=a.n_s())
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let x = node_spectrum(a, j)?;
            Ok(match b {
                None => x.iter().map(|c| c.norm_sqr()).collect(),
                Some(b) => {
                    let y = node_spectrum(b, j)?;
                    x.iter().zip(&y).map(|(p, q)| p.re * q.re + p.im * q.im).collect()
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut out = HistoryModes::zeros(len);
    for (j, prod) in products.iter().enumerate() {
        for (i, p) in prod.iter().enumerate() {
            out.g[i] += wg[j] * p;
            out.neg_dg[i] += wd[j] * p;
            out.d2g[i] += wdd[j] * p;
        }
    }
    Ok(out)
}

/// Spectral view of a state together with the coefficients it is measured with.
#[derive(Clone, Debug)]
pub struct Snapshot {
    grid: Arc<Grid>,
    tau: f64,
    b: f64,
    c2: f64,
    cg2: f64,
    psi: Spectrum,
    v: Spectrum,
    w: Spectrum,
    psi_tau_v: Spectrum,
    v_tau_w: Spectrum,
    moment: Spectrum,
    history: Option<HistoryModes>,
}

/// `Σ_ξ |ξ|^{2κ} Re(a conj b)` scaled to the `L²` pairing.
fn pair(a: &Spectrum, b: &Spectrum, kappa: u32) -> f64 {
    a.weighted_inner(b, kappa)
}

fn lin(a: &Spectrum, x: f64, b: &Spectrum, y: f64) -> Spectrum {
    let mut out = a.clone();
    for (o, q) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *o = *o * x + q * y;
    }
    out
}

impl Snapshot {
    pub fn new(state: &StateVector, params: &SystemParams) -> Result<Self> {
        let grid = Arc::clone(state.grid());
        let psi = state.psi.forward()?;
        let v = state.v.forward()?;
        let w = state.w.forward()?;
        let tau = params.tau();
        let (moment, history) = match &state.history {
            History::Dafermos(h) => (
                h.weighted_sum(HistoryWeight::G).forward()?,
                Some(history_modes(h, None)?),
            ),
            History::Closure(c) if c.mass == 0.0 => {
                (Spectrum::zeros(&grid), Some(HistoryModes::zeros(grid.len())))
            }
            History::Closure(c) => (c.moment.forward()?, None),
        };
        Ok(Self {
            psi_tau_v: lin(&psi, 1.0, &v, tau),
            v_tau_w: lin(&v, 1.0, &w, tau),
            grid,
            tau,
            b: params.b(),
            c2: params.c2(),
            cg2: params.cg2(),
            psi,
            v,
            w,
            moment,
            history,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn psi(&self) -> &Spectrum {
        &self.psi
    }

    pub fn v(&self) -> &Spectrum {
        &self.v
    }

    pub fn w(&self) -> &Spectrum {
        &self.w
    }

    pub fn has_history(&self) -> bool {
        self.history.is_some()
    }

    fn modes(&self) -> Result<&HistoryModes> {
        self.history.as_ref().ok_or(Error::HistoryUnavailable)
    }

    /// `‖∇^κ η‖²` in the weight `w̃` (may be negative for `g″` weights of a
    /// non-convex kernel).
    pub fn history_sq(&self, weight: HistoryWeight, kappa: u32) -> Result<f64> {
        let table = self.modes()?.get(weight);
        let xi2 = self.grid.xi2_table();
        let sum: f64 = table
            .iter()
            .zip(xi2)
            .map(|(h, &k2)| k2.powi(kappa as i32) * h)
            .sum();
        Ok(sum * self.grid.plancherel_scale())
    }

    /// `∫∫ g ∇^κη · ∇^κv ds dx`
    fn history_cross(&self, kappa: u32) -> Result<f64> {
        self.modes()?;
        Ok(pair(&self.moment, &self.v, kappa))
    }

    pub fn norm_sq(&self, which: Component, kappa: u32) -> f64 {
        let s = match which {
            Component::Psi => &self.psi,
            Component::V => &self.v,
            Component::W => &self.w,
            Component::PsiTauV => &self.psi_tau_v,
            Component::VTauW => &self.v_tau_w,
        };
        s.homogeneous_norm_sq(kappa)
    }

    pub fn e1(&self, kappa: u32) -> Result<f64> {
        let k = kappa;
        let t = self.tau;
        Ok(0.5
            * (self.cg2 * self.norm_sq(Component::PsiTauV, k + 1)
                + t * (self.b - t * self.cg2) * self.norm_sq(Component::V, k + 1)
                + self.norm_sq(Component::VTauW, k)
                + t * self.history_sq(HistoryWeight::NegDg, k + 1)?
                + self.history_sq(HistoryWeight::G, k + 1)?
                + 2.0 * t * self.history_cross(k + 1)?))
    }

    /// Energy one derivative level up; each norm carries `Δ∇^κ`, i.e. the
    /// multiplier `|ξ|^{κ+2}`.
    pub fn e2(&self, kappa: u32) -> Result<f64> {
        let k = kappa;
        let t = self.tau;
        Ok(0.5
            * (self.cg2 * self.norm_sq(Component::PsiTauV, k + 2)
                + t * (self.b - t * self.cg2) * self.norm_sq(Component::V, k + 2)
                + self.norm_sq(Component::VTauW, k + 1)
                + t * self.history_sq(HistoryWeight::NegDg, k + 2)?
                + self.history_sq(HistoryWeight::G, k + 2)?
                + 2.0 * t * self.history_cross(k + 2)?))
    }

    pub fn f1(&self, kappa: u32) -> f64 {
        pair(&self.psi_tau_v, &self.v_tau_w, kappa + 1)
    }

    pub fn f2(&self, kappa: u32) -> f64 {
        -self.tau * pair(&self.v, &self.v_tau_w, kappa + 1)
    }

    pub fn lyapunov(&self, kappa: u32, weights: &LyapunovWeights) -> Result<f64> {
        Ok(weights.l1
            * (self.e1(kappa)?
                + self.e2(kappa)?
                + weights.eps * self.tau * self.norm_sq(Component::W, kappa))
            + self.f1(kappa)
            + weights.l2 * self.f2(kappa))
    }

    pub fn script_e(&self, kappa: u32) -> Result<f64> {
        let k = kappa;
        Ok(self.norm_sq(Component::PsiTauV, k + 1)
            + self.norm_sq(Component::VTauW, k)
            + self.norm_sq(Component::V, k + 1)
            + self.history_sq(HistoryWeight::NegDg, k + 1)?
            + self.norm_sq(Component::W, k)
            + self.norm_sq(Component::PsiTauV, k + 2)
            + self.norm_sq(Component::VTauW, k + 1)
            + self.norm_sq(Component::V, k + 2)
            + self.history_sq(HistoryWeight::NegDg, k + 2)?)
    }

    pub fn script_e2(&self, kappa: u32) -> Result<f64> {
        let k = kappa;
        Ok(self.norm_sq(Component::PsiTauV, k + 2)
            + self.norm_sq(Component::VTauW, k + 1)
            + self.norm_sq(Component::V, k + 2)
            + self.history_sq(HistoryWeight::NegDg, k + 2)?)
    }

    pub fn script_d(&self, kappa: u32) -> Result<f64> {
        let k = kappa;
        Ok(self.norm_sq(Component::V, k + 1)
            + self.history_sq(HistoryWeight::NegDg, k + 1)?
            + self.norm_sq(Component::PsiTauV, k + 2)
            + self.norm_sq(Component::VTauW, k + 1)
            + self.norm_sq(Component::V, k + 2)
            + self.history_sq(HistoryWeight::NegDg, k + 2)?
            + self.norm_sq(Component::W, k))
    }

    /// `|||Ψ|||²` summed over `κ = 0..m−1`.
    pub fn problem_norm_sq(&self, m: u32) -> Result<f64> {
        let t = self.tau;
        let d = t * (self.b - t * self.cg2);
        let mut sum = 0.0;
        for k in 0..m {
            sum += self.cg2 * self.norm_sq(Component::PsiTauV, k + 1)
                + d * (self.norm_sq(Component::V, k + 1) + self.norm_sq(Component::V, k))
                + self.norm_sq(Component::VTauW, k)
                + t * self.history_sq(HistoryWeight::NegDg, k + 1)?
                + self.history_sq(HistoryWeight::G, k + 1)?
                + 2.0 * t * self.history_cross(k + 1)?;
        }
        Ok(sum)
    }

    /// `‖Ψ‖²` of the standard space; the history part is skipped when
    /// `with_history` is false.
    pub fn standard_norm_sq(&self, m: u32, with_history: bool) -> Result<f64> {
        let mut sum = 0.0;
        for k in 0..m {
            sum += self.norm_sq(Component::Psi, k + 1)
                + self.norm_sq(Component::V, k)
                + self.norm_sq(Component::W, k);
            if with_history {
                sum += self.history_sq(HistoryWeight::NegDg, k + 1)?;
            }
        }
        Ok(sum + self.norm_sq(Component::V, m))
    }

    /// Instantaneous value inside the supremum defining `Λ[Ψ]`.
    pub fn lambda(&self) -> f64 {
        let s = (self.grid.dim() as f64 - 2.0) / 2.0;
        let v = self.v.inverse();
        let w = self.w.inverse();
        let grad_max = |spec: &Spectrum| -> f64 {
            let comps: Vec<Field> = (0..self.grid.dim())
                .map(|a| spec.derivative(a).inverse())
                .collect();
            (0..self.grid.len())
                .map(|i| comps.iter().map(|c| c.values()[i].powi(2)).sum::<f64>())
                .fold(0.0f64, f64::max)
                .sqrt()
        };
        let hs = |spec: &Spectrum, order: i32| -> f64 {
            let xi2 = self.grid.xi2_table();
            let sum: f64 = spec
                .coeffs()
                .iter()
                .zip(xi2)
                .map(|(c, &k2)| (1.0 + k2).powf(s) * k2.powi(order) * c.norm_sqr())
                .sum();
            (sum * self.grid.plancherel_scale()).sqrt()
        };
        v.max_abs()
            + grad_max(&self.v)
            + w.max_abs()
            + grad_max(&self.psi)
            + hs(&self.psi, 1)
            + hs(&self.psi, 2)
            + hs(&self.v, 0)
            + hs(&self.v, 1)
            + hs(&self.w, 0)
    }

    /// `|𝓕|` terms pairing `F⁽⁰⁾` (spectrum `f0`) with the test functions of
    /// the dissipation relations at level `κ`.
    pub fn rhs_terms(&self, f0: &Spectrum, kappa: u32) -> RhsTerms {
        let k = kappa;
        RhsTerms {
            e1: pair(f0, &self.v_tau_w, k).abs(),
            e2: pair(f0, &self.v_tau_w, k + 1).abs(),
            w: pair(f0, &self.w, k).abs(),
            f1: pair(f0, &self.psi_tau_v, k + 1).abs(),
            f2: (self.tau * pair(f0, &self.v, k + 1)).abs(),
        }
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Psi,
    V,
    W,
    PsiTauV,
    VTauW,
}

/// Absolute nonlinear pairings `|𝓕₀|, |𝓕₁|` entering the dissipation checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RhsTerms {
    /// `|𝓕₀(∇^κ(v+τw))|`
    pub e1: f64,
    /// `|𝓕₁(∇^κ(v+τw))|`
    pub e2: f64,
    /// `|𝓕₀(∇^κ w)|`
    pub w: f64,
    /// `|𝓕₁(∇^κ(ψ+τv))|`
    pub f1: f64,
    /// `|𝓕₁(τ∇^κ v)|`
    pub f2: f64,
}

/// Everything recorded for one derivative level at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KappaSample {
    pub e1: f64,
    pub e2: f64,
    pub f1: f64,
    pub f2: f64,
    /// `‖∇^κ w‖²`
    pub w2: f64,
    pub lyap: f64,
    pub script_e: f64,
    pub script_d: f64,
    /// `𝓔₂^(κ)`: the four `Δ∇^κ`-level terms of `𝓔^(κ)`.
    pub script_e2: f64,
    /// `‖∇^{κ+1} v‖²`
    pub grad_v2: f64,
    /// `‖Δ∇^κ v‖²`
    pub lap_v2: f64,
    /// `‖∇^{κ+1} η‖²_{−g′}`
    pub hist_dg1: f64,
    /// `‖Δ∇^κ η‖²_{−g′}`
    pub hist_dg2: f64,
    /// `‖Δ∇^κ η‖²_g`
    pub hist_g2: f64,
    /// `‖∇^{κ+1} η‖²_{g″}`
    pub hist_d2g1: f64,
    /// `‖Δ∇^κ(ψ+τv)‖²`
    pub lap_psi_tau_v2: f64,
    pub rhs: RhsTerms,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub kappa: Vec<KappaSample>,
    /// Instantaneous argument of the `Λ` supremum.
    pub lambda: f64,
    pub l2_psi: f64,
    pub l2_v: f64,
    pub l2_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub functional: String,
    pub t: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    /// Highest derivative level recorded.
    pub p: usize,
    pub weights: LyapunovWeights,
    pub samples: Vec<EnergySample>,
    pub violations: Vec<Violation>,
}

impl EnergyReport {
    pub fn new(p: usize, weights: LyapunovWeights) -> Self {
        Self {
            p,
            weights,
            samples: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, kappa: usize, f: impl Fn(&KappaSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(|s| f(&s.kappa[kappa])).collect()
    }
}

/// Records all functionals for `κ = 0..=p` of one state.
pub fn energy_sample(
    t: f64,
    state: &StateVector,
    params: &SystemParams,
    p: usize,
    nonlinear: bool,
    weights: &LyapunovWeights,
) -> Result<EnergySample> {
    let snap = Snapshot::new(state, params)?;
    let f0 = if nonlinear {
        Some(nonlinear_term(&state.psi, &state.v, &state.w, params.k(), false)?.forward()?)
    } else {
        None
    };
    let mut kappa = Vec::with_capacity(p + 1);
    for k in 0..=p as u32 {
        kappa.push(KappaSample {
            e1: snap.e1(k)?,
            e2: snap.e2(k)?,
            f1: snap.f1(k),
            f2: snap.f2(k),
            w2: snap.norm_sq(Component::W, k),
            lyap: snap.lyapunov(k, weights)?,
            script_e: snap.script_e(k)?,
            script_d: snap.script_d(k)?,
            script_e2: snap.script_e2(k)?,
            grad_v2: snap.norm_sq(Component::V, k + 1),
            lap_v2: snap.norm_sq(Component::V, k + 2),
            hist_dg1: snap.history_sq(HistoryWeight::NegDg, k + 1)?,
            hist_dg2: snap.history_sq(HistoryWeight::NegDg, k + 2)?,
            hist_g2: snap.history_sq(HistoryWeight::G, k + 2)?,
            hist_d2g1: snap.history_sq(HistoryWeight::D2g, k + 1)?,
            lap_psi_tau_v2: snap.norm_sq(Component::PsiTauV, k + 2),
            rhs: f0.as_ref().map(|f| snap.rhs_terms(f, k)).unwrap_or_default(),
        });
    }
    Ok(EnergySample {
        t,
        kappa,
        lambda: snap.lambda(),
        l2_psi: state.psi.l2_norm(),
        l2_v: state.v.l2_norm(),
        l2_w: state.w.l2_norm(),
    })
}

/// Observer filling an [`EnergyReport`].
pub struct EnergyObserver<'a> {
    params: &'a SystemParams,
    nonlinear: bool,
    pub report: EnergyReport,
}

impl<'a> EnergyObserver<'a> {
    pub fn new(params: &'a SystemParams, p: usize, nonlinear: bool) -> Self {
        Self {
            params,
            nonlinear,
            report: EnergyReport::new(p, LyapunovWeights::default()),
        }
    }

    pub fn with_weights(mut self, weights: LyapunovWeights) -> Self {
        self.report.weights = weights;
        self
    }
}

impl Observer for EnergyObserver<'_> {
    fn observe(&mut self, t: f64, state: &StateVector) -> Result<()> {
        let sample = energy_sample(
            t,
            state,
            self.params,
            self.report.p,
            self.nonlinear,
            &self.report.weights,
        )?;
        self.report.samples.push(sample);
        Ok(())
    }
}

pub fn e1(state: &StateVector, params: &SystemParams, kappa: u32) -> Result<f64> {
    Snapshot::new(state, params)?.e1(kappa)
}

pub fn e2(state: &StateVector, params: &SystemParams, kappa: u32) -> Result<f64> {
    Snapshot::new(state, params)?.e2(kappa)
}

pub fn cross_functionals(state: &StateVector, params: &SystemParams, kappa: u32) -> Result<(f64, f64)> {
    let s = Snapshot::new(state, params)?;
    Ok((s.f1(kappa), s.f2(kappa)))
}

pub fn lyapunov(
    state: &StateVector,
    params: &SystemParams,
    kappa: u32,
    weights: &LyapunovWeights,
) -> Result<f64> {
    Snapshot::new(state, params)?.lyapunov(kappa, weights)
}

pub fn script_functionals(state: &StateVector, params: &SystemParams, kappa: u32) -> Result<(f64, f64)> {
    let s = Snapshot::new(state, params)?;
    Ok((s.script_e(kappa)?, s.script_d(kappa)?))
}

pub fn problem_norm(state: &StateVector, params: &SystemParams, m: u32) -> Result<f64> {
    check_order(m)?;
    Ok(Snapshot::new(state, params)?.problem_norm_sq(m)?.max(0.0).sqrt())
}

pub fn standard_norm(state: &StateVector, params: &SystemParams, m: u32) -> Result<f64> {
    check_order(m)?;
    Ok(Snapshot::new(state, params)?.standard_norm_sq(m, true)?.sqrt())
}

/// Largest `m` accepted by the norm routines.
pub const MAX_ORDER: u32 = 8;

fn check_order(m: u32) -> Result<()> {
    if (1..=MAX_ORDER).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidOrder {
            order: m as usize,
            allowed: "1..=8",
        })
    }
}

/// The problem-specific inner product `(Ψ₁, Ψ₂)` summed over `κ = 0..m−1`.
pub fn problem_inner(a: &StateVector, b: &StateVector, params: &SystemParams, m: u32) -> Result<f64> {
    check_order(m)?;
    a.psi.check_grid(&b.psi)?;
    let (ha, hb) = match (&a.history, &b.history) {
        (History::Dafermos(x), History::Dafermos(y)) => (x, y),
        _ => return Err(Error::HistoryUnavailable),
    };
    let modes = history_modes(ha, Some(hb))?;
    let t = params.tau();
    let cg2 = params.cg2();
    let d = t * (params.b() - t * cg2);
    let spec = |f: &Field| f.forward();
    let (pa, va, wa) = (spec(&a.psi)?, spec(&a.v)?, spec(&a.w)?);
    let (pb, vb, wb) = (spec(&b.psi)?, spec(&b.v)?, spec(&b.w)?);
    let (pta, ptb) = (lin(&pa, 1.0, &va, t), lin(&pb, 1.0, &vb, t));
    let (vta, vtb) = (lin(&va, 1.0, &wa, t), lin(&vb, 1.0, &wb, t));
    let ma = ha.weighted_sum(HistoryWeight::G).forward()?;
    let mb = hb.weighted_sum(HistoryWeight::G).forward()?;
    let grid = a.grid();
    let hist = |table: &[f64], kappa: u32| -> f64 {
        table
            .iter()
            .zip(grid.xi2_table())
            .map(|(h, &k2)| k2.powi(kappa as i32) * h)
            .sum::<f64>()
            * grid.plancherel_scale()
    };
    let mut sum = 0.0;
    for k in 0..m {
        sum += cg2 * pair(&pta, &ptb, k + 1)
            + d * (pair(&va, &vb, k + 1) + pair(&va, &vb, k))
            + pair(&vta, &vtb, k)
            + t * hist(&modes.neg_dg, k + 1)
            + hist(&modes.g, k + 1)
            + t * (pair(&ma, &vb, k + 1) + pair(&mb, &va, k + 1));
    }
    Ok(sum)
}

/// Running supremum of `Σ_{κ≤p} 𝓔^(κ)` and running trapezoid integral of
/// `Σ_{κ≤p} 𝓓^(κ)`, one entry per sample.
pub fn trajectory_norms(report: &EnergyReport, p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if report.samples.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    if p > report.p {
        return Err(Error::InvalidOrder {
            order: p,
            allowed: "at most the recorded level",
        });
    }
    let mut sup = Vec::with_capacity(report.samples.len());
    let mut integral = Vec::with_capacity(report.samples.len());
    let mut best = f64::NEG_INFINITY;
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for s in &report.samples {
        let e: f64 = s.kappa[..=p].iter().map(|k| k.script_e).sum();
        let d: f64 = s.kappa[..=p].iter().map(|k| k.script_d).sum();
        best = best.max(e);
        if let Some((t0, d0)) = prev {
            acc += 0.5 * (s.t - t0) * (d + d0);
        }
        prev = Some((s.t, d));
        sup.push(best);
        integral.push(acc);
    }
    Ok((sup, integral))
}

/// `Λ[Ψ](t)`: running maximum of the recorded instantaneous values up to `t`.
pub fn lambda_sup(report: &EnergyReport, t: f64) -> f64 {
    report
        .samples
        .iter()
        .take_while(|s| s.t <= t)
        .fold(0.0f64, |m, s| m.max(s.lambda))
}

#[cfg(test)]
mod tests;
