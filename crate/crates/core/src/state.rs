//! The first-order state `Ψ = (ψ, v, w, η)` and its history representation.
//!
//! The Dafermos history lives on the uniform nodes `s_j = jΔs`,
//! `j = 0..=N_s`; node `0` is identically zero and not stored. History
//! quadrature uses weights that are exact partners of the upwind difference
//! `(Dη)_j = (η_j − η_{j−1})/Δs`:
//!
//! * `w_j` (weight `g`) are cell integrals of `g` over `[s_{j−1}, s_j]`, or,
//!   for the exponential kernel, the geometric sequence
//!   `mass·(Δs/τ_r)(1 − Δs/τ_r)^{j−1}`;
//! * `w⁻_j = (w_j − w_{j+1})/Δs` (weight `−g′`) and
//!   `w″_j = (w⁻_j − w⁻_{j+1})/Δs` (weight `g″`), with zero beyond `N_s`.
//!
//! With these, `Σ_j w_j (Dη)_j = Σ_j w⁻_j η_j` holds exactly, which is the
//! discrete integration by parts behind every energy identity.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{c_g_squared, MemoryKernel};
use crate::spectral::{Field, Grid};

/// Threshold on `|b − τc²|` below which the regime counts as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    tau: f64,
    b: f64,
    c2: f64,
    k: f64,
    kernel: MemoryKernel,
    cg2: f64,
}

impl SystemParams {
    pub fn new(tau: f64, b: f64, c2: f64, k: f64, kernel: MemoryKernel) -> Result<Self> {
        for (name, value) in [("tau", tau), ("b", b), ("c2", c2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if !k.is_finite() {
            return Err(Error::InvalidParams(format!("k must be finite, got {k}")));
        }
        let cg2 = c_g_squared(&kernel, c2)?;
        Ok(Self {
            tau,
            b,
            c2,
            k,
            kernel,
            cg2,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Friction coefficient, normalised to one.
    pub fn alpha(&self) -> f64 {
        1.0
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.kernel
    }

    pub fn cg2(&self) -> f64 {
        self.cg2
    }

    pub fn mass(&self) -> f64 {
        self.kernel.total_mass()
    }

    /// Sound diffusivity `δ = b − τc²`.
    pub fn delta(&self) -> f64 {
        self.b - self.tau * self.c2
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }

    pub fn with_k(&self, k: f64) -> Self {
        Self { k, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subcritical => "subcritical",
            Self::Critical => "critical",
            Self::Supercritical => "supercritical",
        }
    }
}

pub fn classify_regime(params: &SystemParams) -> Regime {
    let delta = params.delta();
    if delta.abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if delta > 0.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

/// Uniform history nodes `s_j = j·S_max/N_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryGrid {
    n_s: usize,
    s_max: f64,
}

impl HistoryGrid {
    pub fn new(n_s: usize, s_max: f64) -> Result<Self> {
        if n_s < 2 {
            return Err(Error::InvalidParams(format!("need at least two history cells, got {n_s}")));
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::InvalidParams(format!("history length {s_max}")));
        }
        Ok(Self { n_s, s_max })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn ds(&self) -> f64 {
        self.s_max / self.n_s as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.ds()
    }

    /// All nodes `s_0..=s_{N_s}`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_s).map(|j| self.node(j)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HistoryWeight {
    /// `g`
    G,
    /// `−g′`
    NegDg,
    /// `g″`
    D2g,
}

/// Quadrature weights for nodes `1..=N_s` (index `j − 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryWeights {
    grid: HistoryGrid,
    g: Vec<f64>,
    neg_dg: Vec<f64>,
    d2g: Vec<f64>,
}

impl HistoryWeights {
    pub fn new(kernel: &MemoryKernel, grid: HistoryGrid) -> Result<Self> {
        let n = grid.n_s();
        let ds = grid.ds();
        let g: Vec<f64> = match kernel {
            MemoryKernel::Exponential { tau_r, .. } => {
                if ds >= *tau_r {
                    return Err(Error::InvalidParams(format!(
                        "history spacing {ds} must be below the relaxation time {tau_r}"
                    )));
                }
                let ratio = ds / tau_r;
                let first = kernel.total_mass() * ratio;
                let q = 1.0 - ratio;
                let mut w = Vec::with_capacity(n);
                let mut current = first;
                for _ in 0..n {
                    w.push(current);
                    current *= q;
                }
                w
            }
            MemoryKernel::Tabulated(_) => (1..=n)
                .map(|j| kernel.integral(grid.node(j - 1), grid.node(j)))
                .collect(),
            MemoryKernel::Memoryless => vec![0.0; n],
        };
        let neg_dg = backward_difference(&g, ds);
        let d2g = backward_difference(&neg_dg, ds);
        Ok(Self {
            grid,
            g,
            neg_dg,
            d2g,
        })
    }

    pub fn grid(&self) -> HistoryGrid {
        self.grid
    }

    pub fn get(&self, kind: HistoryWeight) -> &[f64] {
        match kind {
            HistoryWeight::G => &self.g,
            HistoryWeight::NegDg => &self.neg_dg,
            HistoryWeight::D2g => &self.d2g,
        }
    }

    /// `Σ_j w_j`, the discrete kernel mass.
    pub fn mass(&self) -> f64 {
        self.g.iter().sum()
    }
}

fn backward_difference(w: &[f64], ds: f64) -> Vec<f64> {
    (0..w.len())
        .map(|j| (w[j] - w.get(j + 1).copied().unwrap_or(0.0)) / ds)
        .collect()
}

/// Resolved history `η(s_j)` for `j = 1..=N_s`, stored node-major.
#[derive(Clone, Debug)]
pub struct HistoryField {
    weights: Arc<HistoryWeights>,
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Scalar profile in `s`.
pub type Profile<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

impl HistoryField {
    pub fn zeros(grid: &Arc<Grid>, weights: &Arc<HistoryWeights>) -> Self {
        Self {
            weights: Arc::clone(weights),
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len() * weights.grid().n_s()],
        }
    }

    /// Node-major values `η(s_1), …, η(s_{N_s})`.
    pub fn from_values(grid: &Arc<Grid>, weights: &Arc<HistoryWeights>, values: Vec<f64>) -> Result<Self> {
        let expected = grid.len() * weights.grid().n_s();
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} history values, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "history", index });
        }
        Ok(Self {
            weights: Arc::clone(weights),
            grid: Arc::clone(grid),
            values,
        })
    }

    /// `η(s_j) = f` for every `j ≥ 1`.
    pub fn constant_in_s(f: &Field, weights: &Arc<HistoryWeights>) -> Self {
        let n_s = weights.grid().n_s();
        let mut values = Vec::with_capacity(f.values().len() * n_s);
        for _ in 0..n_s {
            values.extend_from_slice(f.values());
        }
        Self {
            weights: Arc::clone(weights),
            grid: Arc::clone(f.grid()),
            values,
        }
    }

    /// `η(s_j) = Σ_l profile_l(s_j) f_l`.
    pub fn from_profiles(
        grid: &Arc<Grid>,
        weights: &Arc<HistoryWeights>,
        terms: &[(Profile<'_>, &Field)],
    ) -> Self {
        let mut out = Self::zeros(grid, weights);
        let hgrid = weights.grid();
        for j in 1..=hgrid.n_s() {
            let s = hgrid.node(j);
            let node = out.node_mut(j);
            for (profile, field) in terms {
                let a = profile(s);
                for (x, y) in node.iter_mut().zip(field.values()) {
                    *x += a * y;
                }
            }
        }
        out
    }

    pub fn weights(&self) -> &Arc<HistoryWeights> {
        &self.weights
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_s(&self) -> usize {
        self.weights.grid().n_s()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Samples at node `j ∈ 1..=N_s`.
    pub fn node(&self, j: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[(j - 1) * n..j * n]
    }

    pub fn node_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.values[(j - 1) * n..j * n]
    }

    /// Node `j ∈ 0..=N_s` as a field; node `0` is the zero field.
    pub fn node_field(&self, j: usize) -> Field {
        if j == 0 {
            Field::zeros(&self.grid)
        } else {
            Field::from_values(&self.grid, self.node(j).to_vec())
                .unwrap_or_else(|_| Field::zeros(&self.grid))
        }
    }

    /// `Σ_j w_j η_j` for the chosen weight.
    pub fn weighted_sum(&self, kind: HistoryWeight) -> Field {
        let mut out = vec![0.0; self.grid.len()];
        for (j, &wj) in self.weights.get(kind).iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.node(j + 1)) {
                *o += wj * x;
            }
        }
        Field::from_values(&self.grid, out).unwrap_or_else(|_| Field::zeros(&self.grid))
    }
}

/// `M = ∫ g η ds` evolved by `dM/dt = mass·v − rate·M`.
#[derive(Clone, Debug)]
pub struct ClosureMoment {
    pub moment: Field,
    pub mass: f64,
    pub rate: f64,
}

#[derive(Clone, Debug)]
pub enum History {
    Dafermos(HistoryField),
    Closure(ClosureMoment),
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub psi: Field,
    pub v: Field,
    pub w: Field,
    pub history: History,
}

impl StateVector {
    pub fn grid(&self) -> &Arc<Grid> {
        self.psi.grid()
    }

    pub fn zeros_like(&self) -> Self {
        let grid = self.grid();
        let history = match &self.history {
            History::Dafermos(h) => History::Dafermos(HistoryField::zeros(grid, h.weights())),
            History::Closure(c) => History::Closure(ClosureMoment {
                moment: Field::zeros(grid),
                mass: c.mass,
                rate: c.rate,
            }),
        };
        Self {
            psi: Field::zeros(grid),
            v: Field::zeros(grid),
            w: Field::zeros(grid),
            history,
        }
    }

    /// `self += a * other` on every component.
    pub fn axpy(&mut self, a: f64, other: &StateVector) {
        self.psi.axpy(a, &other.psi);
        self.v.axpy(a, &other.v);
        self.w.axpy(a, &other.w);
        match (&mut self.history, &other.history) {
            (History::Dafermos(x), History::Dafermos(y)) => {
                for (p, q) in x.values.iter_mut().zip(&y.values) {
                    *p += a * q;
                }
            }
            (History::Closure(x), History::Closure(y)) => x.moment.axpy(a, &y.moment),
            _ => panic!("axpy between different history representations"),
        }
    }

    /// `self + Σ a_i x_i` in a single pass over each component.
    pub fn combine(&self, terms: &[(f64, &StateVector)]) -> StateVector {
        let field = |f: &Field, pick: &dyn Fn(&StateVector) -> &Field| -> Field {
            let slices: Vec<(f64, &[f64])> = terms.iter().map(|(a, x)| (*a, pick(x).values())).collect();
            Field::from_values_unchecked(f.grid(), combine_slices(f.values(), &slices))
        };
        let history = match &self.history {
            History::Dafermos(h) => {
                let slices: Vec<(f64, &[f64])> = terms
                    .iter()
                    .map(|(a, x)| match &x.history {
                        History::Dafermos(y) => (*a, y.values.as_slice()),
                        History::Closure(_) => panic!("combine between different history representations"),
                    })
                    .collect();
                History::Dafermos(HistoryField {
                    weights: Arc::clone(&h.weights),
                    grid: Arc::clone(&h.grid),
                    values: combine_slices(&h.values, &slices),
                })
            }
            History::Closure(c) => History::Closure(ClosureMoment {
                moment: field(&c.moment, &|x| match &x.history {
                    History::Closure(y) => &y.moment,
                    History::Dafermos(_) => panic!("combine between different history representations"),
                }),
                mass: c.mass,
                rate: c.rate,
            }),
        };
        StateVector {
            psi: field(&self.psi, &|x| &x.psi),
            v: field(&self.v, &|x| &x.v),
            w: field(&self.w, &|x| &x.w),
            history,
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.psi.scale(a);
        self.v.scale(a);
        self.w.scale(a);
        match &mut self.history {
            History::Dafermos(h) => h.values.iter_mut().for_each(|x| *x *= a),
            History::Closure(c) => c.moment.scale(a),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite()
            && self.v.is_finite()
            && self.w.is_finite()
            && match &self.history {
                History::Dafermos(h) => h.values.iter().all(|x| x.is_finite()),
                History::Closure(c) => c.moment.is_finite(),
            }
    }

    /// Finiteness of `ψ, v, w` only; the history is driven linearly by `v`.
    pub fn fields_finite(&self) -> bool {
        self.psi.is_finite() && self.v.is_finite() && self.w.is_finite()
    }

    pub fn dafermos(&self) -> Option<&HistoryField> {
        match &self.history {
            History::Dafermos(h) => Some(h),
            History::Closure(_) => None,
        }
    }

    /// `∫ g η ds`, from either representation.
    pub fn memory_moment(&self) -> Field {
        match &self.history {
            History::Dafermos(h) => h.weighted_sum(HistoryWeight::G),
            History::Closure(c) => c.moment.clone(),
        }
    }

    /// Whether history norms are available (resolved history, or no memory).
    pub fn history_resolved(&self) -> bool {
        match &self.history {
            History::Dafermos(_) => true,
            History::Closure(c) => c.mass == 0.0,
        }
    }

    /// Largest absolute value across `ψ, v, w` and the history.
    pub fn max_abs(&self) -> f64 {
        let h = match &self.history {
            History::Dafermos(h) => h.values.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            History::Closure(c) => c.moment.max_abs(),
        };
        self.psi.max_abs().max(self.v.max_abs()).max(self.w.max_abs()).max(h)
    }
}

fn combine_slices(base: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    const CHUNK: usize = 512;
    let mut out = base.to_vec();
    for (i, chunk) in out.chunks_mut(CHUNK).enumerate() {
        let lo = i * CHUNK;
        for (a, x) in terms {
            let len = chunk.len();
            for (o, y) in chunk.iter_mut().zip(&x[lo..lo + len]) {
                *o += a * y;
            }
        }
    }
    out
}

/// How the history is represented.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryConfig {
    Dafermos { n_s: usize, s_max: f64 },
    Closure,
}

/// Builds `(ψ₀, ψ₁, ψ₂, η₀)` with `η₀(s_j) = ψ₀` for `j ≥ 1`, or
/// `M = mass·ψ₀` in closure mode.
pub fn init_state(
    params: &SystemParams,
    psi0: &Field,
    psi1: &Field,
    psi2: &Field,
    history: &HistoryConfig,
) -> Result<StateVector> {
    psi0.check_grid(psi1)?;
    psi0.check_grid(psi2)?;
    psi0.ensure_finite("psi0")?;
    psi1.ensure_finite("psi1")?;
    psi2.ensure_finite("psi2")?;
    let history = match *history {
        HistoryConfig::Dafermos { n_s, s_max } => {
            let weights = Arc::new(HistoryWeights::new(
                params.kernel(),
                HistoryGrid::new(n_s, s_max)?,
            )?);
            History::Dafermos(HistoryField::constant_in_s(psi0, &weights))
        }
        HistoryConfig::Closure => History::Closure(closure_moment(params, psi0)?),
    };
    Ok(StateVector {
        psi: psi0.clone(),
        v: psi1.clone(),
        w: psi2.clone(),
        history,
    })
}

/// Closure representation of the constant-in-`s` history `η ≡ ψ₀`.
pub fn closure_moment(params: &SystemParams, psi0: &Field) -> Result<ClosureMoment> {
    let (mass, rate) = match params.kernel() {
        MemoryKernel::Exponential { tau_r, .. } => (params.mass(), 1.0 / tau_r),
        MemoryKernel::Memoryless => (0.0, 0.0),
        MemoryKernel::Tabulated(_) => return Err(Error::ClosureRequiresExponential),
    };
    Ok(ClosureMoment {
        moment: psi0.scaled(mass),
        mass,
        rate,
    })
}

/// `(Σ_j w̃_j ‖∇^κ η_j‖²)^{1/2}` for the weight `w̃ ∈ {g, −g′, g″}`.
///
/// The `g″` weights may be negative for kernels violating convexity; the
/// weighted sum is then clamped at zero before the square root.
pub fn history_weighted_norm(history: &History, weight: HistoryWeight, kappa: u32) -> Result<f64> {
    let History::Dafermos(h) = history else {
        return Err(Error::HistoryUnavailable);
    };
    let weights = h.weights().get(weight);
    let mut sum = 0.0;
    for (j, &wj) in weights.iter().enumerate() {
        if wj == 0.0 {
            continue;
        }
        let node = h.node_field(j + 1);
        sum += wj * node.forward()?.homogeneous_norm_sq(kappa);
    }
    Ok(sum.max(0.0).sqrt())
}
