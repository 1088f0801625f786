//! Long-time runs from small data: the norm
//! `|||Ψ|||_{(0,t)} = (sup_{σ≤t} Σ_κ 𝓔^(κ))^{1/2} + (∫₀^t Σ_κ 𝓓^(κ))^{1/2}`
//! is tracked and tested for boundedness.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::strauss::{strauss_bound, StraussBound};
use super::Verdict;
use crate::dynamics::{simulate, MemoryMode, RhsConfig, SimulationConfig, Unforced};
use crate::energy::{energy_sample, trajectory_norms, EnergyObserver, LyapunovWeights};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};
use crate::state::{init_state, HistoryConfig, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlobalConfig {
    pub horizon: f64,
    pub dt: f64,
    /// Energy samples every `stride` steps.
    pub stride: usize,
    /// Highest level `p` in the `𝓔_p`, `𝓓_p` sums.
    pub p: usize,
    pub history: HistoryConfig,
    /// Time at which the reference value of the norm is read.
    pub reference_time: f64,
    /// Bounded iff the norm stays below `growth_factor` times its reference value.
    pub growth_factor: f64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            horizon: 50.0,
            dt: 0.01,
            stride: 10,
            p: 1,
            history: HistoryConfig::Dafermos { n_s: 256, s_max: 30.0 },
            reference_time: 1.0,
            growth_factor: 2.0,
        }
    }
}

/// Gaussian bump `ψ₀ = e^{−|x−x_c|²/σ²}` centred in the box and a shifted,
/// modulated bump `ψ₁`.
pub fn bump_data(grid: &Arc<Grid>, width: f64) -> (Field, Field) {
    let dim = grid.dim();
    let centre: Vec<f64> = (0..dim).map(|a| 0.5 * grid.box_length(a)).collect();
    let r2 = |x: &[f64]| -> f64 { (0..dim).map(|a| (x[a] - centre[a]).powi(2)).sum() };
    let psi0 = Field::from_fn(grid, |x| (-r2(x) / (width * width)).exp());
    let psi1 = Field::from_fn(grid, |x| {
        let shifted: f64 = (x[0] - centre[0] - 0.5 * width).powi(2)
            + (1..dim).map(|a| (x[a] - centre[a]).powi(2)).sum::<f64>();
        0.5 * (-shifted / (width * width)).exp() * (2.0 * PI * x[0] / grid.box_length(0)).cos()
    });
    (psi0, psi1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bootstrap {
    /// Reference value `a = y(t_ref)`.
    pub a: f64,
    /// Smallest `b` with `y ≤ a + b y^{3/2}` along the record.
    pub b: f64,
    pub strauss: Option<StraussBound>,
    /// Whether the recorded `y` stays below the bound (trivially when `b = 0`).
    pub below_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalOutcome {
    /// `(Σ_{κ≤p} 𝓔^(κ)(0))^{1/2}` of the data.
    pub amplitude: f64,
    pub verdict: Verdict,
    pub times: Vec<f64>,
    /// `|||Ψ|||_{(0,t)}` at each sample.
    pub norm: Vec<f64>,
    pub reference: f64,
    pub max_norm: f64,
    pub blowup_time: Option<f64>,
    pub bootstrap: Bootstrap,
}

/// Fits `y ≤ a + b y^{3/2}` with `a = y(t_ref)` and applies the bootstrap
/// lemma with exponent `3/2`.
pub fn bootstrap_fit(norm: &[f64], a: f64) -> Result<Bootstrap> {
    let b = norm
        .iter()
        .filter(|y| **y > 0.0)
        .map(|y| (y - a).max(0.0) / y.powf(1.5))
        .fold(0.0f64, f64::max);
    let max_y = norm.iter().fold(0.0f64, |m, y| m.max(*y));
    if a <= 0.0 || b <= 0.0 {
        return Ok(Bootstrap {
            a,
            b,
            strauss: None,
            below_bound: max_y <= a,
        });
    }
    let s = strauss_bound(a, b, 1.5)?;
    Ok(Bootstrap {
        a,
        b,
        strauss: Some(s),
        below_bound: s.feasible && max_y < s.bound,
    })
}

/// Runs the data `amplitude · (ψ₀, ψ₁, 0)/|(ψ₀, ψ₁, 0)|` to the horizon.
pub fn global_bound_experiment(
    params: &SystemParams,
    psi0: &Field,
    psi1: &Field,
    amplitude: f64,
    config: &GlobalConfig,
) -> Result<GlobalOutcome> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude {amplitude}")));
    }
    let z = Field::zeros(psi0.grid());
    let base = init_state(params, psi0, psi1, &z, &config.history)?;
    let weights = LyapunovWeights::default();
    let sample = energy_sample(0.0, &base, params, config.p, false, &weights)?;
    let base_norm = sample.kappa.iter().map(|k| k.script_e).sum::<f64>().sqrt();
    if base_norm == 0.0 {
        return Err(Error::InvalidArgument("data shape has zero norm".into()));
    }
    let initial = base.scaled(amplitude / base_norm);

    let mode = match config.history {
        HistoryConfig::Dafermos { .. } => MemoryMode::Dafermos,
        HistoryConfig::Closure => MemoryMode::Closure,
    };
    let sim = SimulationConfig::new(config.horizon, config.dt, RhsConfig::nonlinear(mode)).with_stride(config.stride);
    let mut obs = EnergyObserver::new(params, config.p, false);
    let outcome = simulate(params, initial, &sim, &Unforced, &mut [&mut obs])?;
    let report = obs.report;
    let (sup, integral) = trajectory_norms(&report, config.p)?;
    let norm: Vec<f64> = sup.iter().zip(&integral).map(|(e, d)| e.sqrt() + d.sqrt()).collect();
    let times = report.times();
    let reference = times
        .iter()
        .position(|t| *t >= config.reference_time - 1e-9)
        .map(|i| norm[i])
        .unwrap_or(*norm.last().expect("non-empty"));
    let max_norm = norm.iter().fold(0.0f64, |m, y| m.max(*y));
    let blowup_time = outcome.blowup.as_ref().map(|b| b.t);
    let verdict = if blowup_time.is_some() || max_norm > config.growth_factor * reference {
        Verdict::Growth
    } else {
        Verdict::Bounded
    };
    let bootstrap = bootstrap_fit(&norm, reference)?;
    Ok(GlobalOutcome {
        amplitude,
        verdict,
        times,
        norm,
        reference,
        max_norm,
        blowup_time,
        bootstrap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessSweep {
    pub amplitudes: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    /// No bounded verdict follows a growth verdict.
    pub monotone: bool,
    /// Bracket `[last bounded, first growth]` after bisection.
    pub threshold: Option<(f64, f64)>,
}

/// Runs increasing amplitudes and bisects between the last bounded and the
/// first growth amplitude.
pub fn smallness_sweep(
    params: &SystemParams,
    psi0: &Field,
    psi1: &Field,
    amplitudes: &[f64],
    bisections: usize,
    config: &GlobalConfig,
) -> Result<SmallnessSweep> {
    let mut verdicts = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        verdicts.push(global_bound_experiment(params, psi0, psi1, a, config)?.verdict);
    }
    let first_growth = verdicts.iter().position(|v| *v == Verdict::Growth);
    let monotone = match first_growth {
        Some(i) => verdicts[i..].iter().all(|v| *v == Verdict::Growth),
        None => true,
    };
    let threshold = match first_growth {
        Some(i) if i > 0 => {
            let (mut lo, mut hi) = (amplitudes[i - 1], amplitudes[i]);
            for _ in 0..bisections {
                let mid = (lo * hi).sqrt();
                match global_bound_experiment(params, psi0, psi1, mid, config)?.verdict {
                    Verdict::Growth => hi = mid,
                    _ => lo = mid,
                }
            }
            Some((lo, hi))
        }
        _ => None,
    };
    Ok(SmallnessSweep {
        amplitudes: amplitudes.to_vec(),
        verdicts,
        monotone,
        threshold,
    })
}
