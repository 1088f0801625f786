//! Seeded random states for the sampling-based checks.
//!
//! Fields are band-limited trigonometric sums over integer mode vectors
//! `|k_a| ≤ max_mode`, drawn in a fixed order, so a given seed yields the same
//! continuous field on every grid that resolves it.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::Snapshot;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};
use crate::state::{History, HistoryField, HistoryWeights, StateVector, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSpec {
    /// Largest integer mode index per axis.
    pub max_mode: i64,
    /// Coefficients decay like `(1 + |k|²)^{-decay}`.
    pub decay: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            max_mode: 4,
            decay: 1.0,
        }
    }
}

fn mode_vectors(dim: usize, max_mode: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let r = -max_mode..=max_mode;
    let range_or_zero = |a: usize| if a < dim { r.clone() } else { 0..=0 };
    for k0 in range_or_zero(0) {
        for k1 in range_or_zero(1) {
            for k2 in range_or_zero(2) {
                out.push([k0, k1, k2]);
            }
        }
    }
    out
}

/// Real band-limited field `Σ_k a_k cos(2π k·x/L + φ_k)`.
pub fn band_limited_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, spec: &SampleSpec) -> Result<Field> {
    let dim = grid.dim();
    if spec.max_mode < 0 || 3 * spec.max_mode as usize > grid.points_per_axis() {
        return Err(Error::InvalidArgument(format!(
            "max_mode {} is not resolved by {} points",
            spec.max_mode,
            grid.points_per_axis()
        )));
    }
    let terms: Vec<([f64; 3], f64, f64)> = mode_vectors(dim, spec.max_mode)
        .into_iter()
        .map(|k| {
            let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            let amp = rng.gen_range(-1.0..1.0) * (1.0 + k2).powf(-spec.decay);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let kv = [
                2.0 * PI * k[0] as f64 / grid.box_length(0),
                if dim > 1 { 2.0 * PI * k[1] as f64 / grid.box_length(1) } else { 0.0 },
                if dim > 2 { 2.0 * PI * k[2] as f64 / grid.box_length(2) } else { 0.0 },
            ];
            (kv, amp, phase)
        })
        .collect();
    Ok(Field::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, a, p)| {
                let arg: f64 = (0..dim).map(|d| k[d] * x[d]).sum();
                a * (arg + p).cos()
            })
            .sum()
    }))
}

/// Random state in the discrete domain: `η(s) = (1 − e^{−s})A + s e^{−s}B`
/// vanishes at `s = 0`.
pub fn random_state(
    grid: &Arc<Grid>,
    weights: &Arc<HistoryWeights>,
    rng: &mut ChaCha8Rng,
    spec: &SampleSpec,
) -> Result<StateVector> {
    let psi = band_limited_field(grid, rng, spec)?;
    let v = band_limited_field(grid, rng, spec)?;
    let w = band_limited_field(grid, rng, spec)?;
    let a = band_limited_field(grid, rng, spec)?;
    let b = band_limited_field(grid, rng, spec)?;
    let scale = rng.gen_range(0.2..2.0);
    let h = HistoryField::from_profiles(
        grid,
        weights,
        &[
            (Box::new(move |s: f64| scale * (1.0 - (-s).exp())), &a),
            (Box::new(move |s: f64| s * (-s / scale).exp()), &b),
        ],
    );
    Ok(StateVector {
        psi,
        v,
        w,
        history: History::Dafermos(h),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEquivalence {
    /// Smallest observed `|||Ψ||| / ‖Ψ‖`.
    pub c1: f64,
    /// Largest observed `|||Ψ||| / ‖Ψ‖`.
    pub c2: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Empirical constants of `C1‖Ψ‖ ≤ |||Ψ||| ≤ C2‖Ψ‖` over random states.
pub fn norm_equivalence(
    params: &SystemParams,
    grid: &Arc<Grid>,
    weights: &Arc<HistoryWeights>,
    m: u32,
    samples: usize,
    seed: u64,
    spec: &SampleSpec,
) -> Result<NormEquivalence> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for _ in 0..samples {
        let s = random_state(grid, weights, &mut rng, spec)?;
        let snap = Snapshot::new(&s, params)?;
        let problem = snap.problem_norm_sq(m)?.max(0.0).sqrt();
        let standard = snap.standard_norm_sq(m, true)?.sqrt();
        if standard > 0.0 {
            let r = problem / standard;
            c1 = c1.min(r);
            c2 = c2.max(r);
        }
    }
    Ok(NormEquivalence {
        c1,
        c2,
        samples,
        seed,
    })
}
