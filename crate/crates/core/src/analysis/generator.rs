//! The shifted generator `𝒜_B = 𝒜 + B` and its resolvent on the discrete
//! Dafermos phase space.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sampling::{random_state, SampleSpec};
use crate::dynamics::{rhs, MemoryMode, RhsConfig};
use crate::energy::{problem_inner, Snapshot};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};
use crate::state::{History, HistoryField, HistoryWeight, HistoryWeights, StateVector, SystemParams};

/// `𝒜_B Ψ`: the linear right-hand side with `−(b − τc_g²)v/τ` added to `w′`.
pub fn generator_apply(state: &StateVector, params: &SystemParams) -> Result<StateVector> {
    if state.dafermos().is_none() {
        return Err(Error::HistoryUnavailable);
    }
    let mut out = rhs(state, params, &RhsConfig::linear(MemoryMode::Dafermos), 0.0, None)?;
    out.w.axpy(-(params.b() - params.tau() * params.cg2()) / params.tau(), &state.v);
    Ok(out)
}

/// `(𝒜_B Ψ, Ψ)` in the problem inner product of order `m`.
pub fn generator_value(state: &StateVector, params: &SystemParams, m: u32) -> Result<f64> {
    problem_inner(&generator_apply(state, params)?, state, params, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneratorReport {
    /// Largest `(𝒜_BΨ, Ψ) / |||Ψ|||²` over the samples.
    pub max_ratio: f64,
    /// The value attaining `max_ratio`.
    pub max_value: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Samples random domain states and reports the largest normalised value of
/// `(𝒜_B Ψ, Ψ)`.
pub fn generator_dissipativity(
    params: &SystemParams,
    grid: &Arc<Grid>,
    weights: &Arc<HistoryWeights>,
    m: u32,
    samples: usize,
    seed: u64,
    spec: &SampleSpec,
) -> Result<GeneratorReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GeneratorReport {
        max_ratio: f64::NEG_INFINITY,
        max_value: 0.0,
        samples,
        seed,
    };
    for _ in 0..samples {
        let s = random_state(grid, weights, &mut rng, spec)?;
        let value = generator_value(&s, params, m)?;
        let norm = Snapshot::new(&s, params)?.problem_norm_sq(m)?;
        let ratio = if norm > 0.0 { value / norm } else { 0.0 };
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.max_value = value;
        }
    }
    if samples == 0 {
        out.max_ratio = 0.0;
    }
    Ok(out)
}

/// State with `ψ = v = w = 0` and history `η(s) = (s/ℓ) e^{1 − s/ℓ} cos(2πx₀/L₀)`
/// concentrated near `s = ℓ`, where the kernel shape alone decides the sign of
/// `(𝒜_B Ψ, Ψ)`.
pub fn history_probe(grid: &Arc<Grid>, weights: &Arc<HistoryWeights>, width: f64) -> Result<StateVector> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidArgument(format!("probe width {width}")));
    }
    let mode = Field::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x[0] / grid.box_length(0)).cos());
    let z = Field::zeros(grid);
    let profile = move |s: f64| (s / width) * (1.0 - s / width).exp();
    Ok(StateVector {
        psi: z.clone(),
        v: z.clone(),
        w: z,
        history: History::Dafermos(HistoryField::from_profiles(grid, weights, &[(Box::new(profile), &mode)])),
    })
}

/// Spectral solution of `−νΔv + σv = q`.
pub fn solve_elliptic(q: &Field, nu: f64, sigma: f64) -> Result<Field> {
    if !(sigma > 0.0 && nu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "elliptic coefficients must satisfy ν ≥ 0, σ > 0 (got ν={nu}, σ={sigma})"
        )));
    }
    let spec = q.forward()?;
    let grid = Arc::clone(q.grid());
    Ok(spec.map_indexed(|i, c| c / (nu * grid.xi2(i) + sigma)).inverse())
}

/// Data `F = (f, g, h, p)` of the resolvent equation `Ψ − 𝒜_B Ψ = F`.
pub type ResolventData = StateVector;

/// Coefficients of the elliptic problem for `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolventCoefficients {
    pub nu: f64,
    pub sigma: f64,
}

/// Solves `Ψ − 𝒜_B Ψ = F` on the discrete phase space.
///
/// The history equation `η_j = v − (η_j − η_{j−1})/Δs + p_j` with `η_0 = 0`
/// gives `η_j = α_j v + P_j`; substituting into the `w` equation leaves
/// `−νΔv + σv = q` with `ν = b + c_g² + Σ_j w_j α_j`, `σ = 1 + τ + b − τc_g²`
/// and `q = c_g²Δf + (1+τ)g + τh + Σ_j w_j ΔP_j`.
pub fn resolvent_solve(params: &SystemParams, data: &ResolventData) -> Result<(StateVector, ResolventCoefficients)> {
    let p = data.dafermos().ok_or(Error::HistoryUnavailable)?;
    if !data.is_finite() {
        return Err(Error::InvalidArgument("resolvent data must be finite".into()));
    }
    let grid = Arc::clone(data.grid());
    let weights = Arc::clone(p.weights());
    let wg = weights.get(HistoryWeight::G);
    let ds = weights.grid().ds();
    let n = grid.len();
    let tau = params.tau();
    let cg2 = params.cg2();

    let mut alpha = Vec::with_capacity(p.n_s());
    let mut big_p = HistoryField::zeros(&grid, &weights);
    let mut a_prev = 0.0;
    for j in 1..=p.n_s() {
        let a = (a_prev + ds) / (1.0 + ds);
        alpha.push(a);
        a_prev = a;
        let src = p.node(j).to_vec();
        let prev = if j > 1 { big_p.node(j - 1).to_vec() } else { vec![0.0; n] };
        let node = big_p.node_mut(j);
        for i in 0..n {
            node[i] = (prev[i] + ds * src[i]) / (1.0 + ds);
        }
    }

    let nu = params.b() + cg2 + wg.iter().zip(&alpha).map(|(w, a)| w * a).sum::<f64>();
    let sigma = 1.0 + tau + (params.b() - params.tau() * params.cg2());
    assert!(sigma > 0.0, "σ is positive for admissible parameters");

    let mut q = data.psi.laplacian()?.scaled(cg2);
    q.axpy(1.0 + tau, &data.v);
    q.axpy(tau, &data.w);
    q.axpy(1.0, &big_p.weighted_sum(HistoryWeight::G).laplacian()?);

    let v = solve_elliptic(&q, nu, sigma)?;
    let psi = v.lin_comb(1.0, &data.psi, 1.0);
    let w = v.lin_comb(1.0, &data.v, -1.0);
    let mut eta = big_p;
    for (j, a) in alpha.iter().enumerate() {
        let node = eta.node_mut(j + 1);
        for (x, y) in node.iter_mut().zip(v.values()) {
            *x += a * y;
        }
    }
    Ok((
        StateVector {
            psi,
            v,
            w,
            history: History::Dafermos(eta),
        },
        ResolventCoefficients { nu, sigma },
    ))
}

/// `‖(I − 𝒜_B)Ψ − F‖` in the standard norm of order `m`, relative to `‖F‖`.
pub fn resolvent_residual(
    params: &SystemParams,
    solution: &StateVector,
    data: &ResolventData,
    m: u32,
) -> Result<f64> {
    let mut r = solution.clone();
    r.axpy(-1.0, &generator_apply(solution, params)?);
    r.axpy(-1.0, data);
    let num = Snapshot::new(&r, params)?.standard_norm_sq(m, true)?.sqrt();
    let den = Snapshot::new(data, params)?.standard_norm_sq(m, true)?.sqrt();
    Ok(if den > 0.0 { num / den } else { num })
}
