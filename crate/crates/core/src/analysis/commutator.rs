//! Empirical constants for the commutator estimate
//! `‖[∇^κ, f]g‖₂ ≤ C (‖∇f‖_∞ ‖∇^{κ−1}g‖₂ + ‖∇^κ f‖₂ ‖g‖_∞)`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sampling::{band_limited_field, SampleSpec};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, Tensor};

/// `[∇^κ, f]g = ∇^κ(fg) − f ∇^κ g` for `κ ∈ {1, 2}`.
pub fn commutator(f: &Field, g: &Field, kappa: usize) -> Result<Tensor> {
    f.check_grid(g)?;
    let full = f.mul(g).partials_tensor(kappa)?;
    let inner = g.partials_tensor(kappa)?;
    let comps = full
        .components()
        .iter()
        .zip(inner.components())
        .map(|(a, b)| {
            let mut c = a.clone();
            c.axpy(-1.0, &f.mul(b));
            c
        })
        .collect();
    Tensor::new(kappa, f.grid().dim(), comps)
}

/// Pointwise Euclidean maximum of `∇f`.
fn grad_max(f: &Field) -> Result<f64> {
    let comps = f.gradient()?;
    let n = f.grid().len();
    Ok((0..n)
        .map(|i| comps.iter().map(|c| c.values()[i].powi(2)).sum::<f64>())
        .fold(0.0f64, f64::max)
        .sqrt())
}

/// Left side over right side of the estimate; zero when both vanish.
pub fn commutator_ratio(f: &Field, g: &Field, kappa: usize) -> Result<f64> {
    let lhs = commutator(f, g, kappa)?.l2_norm();
    let rhs = grad_max(f)? * g.homogeneous_norm(kappa as u32 - 1)?
        + f.homogeneous_norm(kappa as u32)? * g.max_abs();
    if rhs == 0.0 {
        return Ok(if lhs == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(lhs / rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutatorProbe {
    pub kappa: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Ratios over `samples` random band-limited pairs.
pub fn commutator_probe(
    grid: &Arc<Grid>,
    kappa: usize,
    samples: usize,
    seed: u64,
    spec: &SampleSpec,
) -> Result<CommutatorProbe> {
    if !(1..=2).contains(&kappa) {
        return Err(Error::InvalidOrder {
            order: kappa,
            allowed: "1 or 2",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut sum = 0.0;
    for _ in 0..samples {
        let f = band_limited_field(grid, &mut rng, spec)?;
        let g = band_limited_field(grid, &mut rng, spec)?;
        let r = commutator_ratio(&f, &g, kappa)?;
        max_ratio = max_ratio.max(r);
        sum += r;
    }
    Ok(CommutatorProbe {
        kappa,
        max_ratio,
        mean_ratio: if samples > 0 { sum / samples as f64 } else { 0.0 },
        samples,
        seed,
    })
}
