//! Manufactured solutions `ψ(x, t) = A X(x) cos(ωt)` and their sources.
//!
//! The source makes `ψ` an exact solution of
//! `τψ_ttt + ψ_tt − c²Δψ − bΔψ_t + ∫₀^t g(s)Δψ(t−s) ds = (kψ_t² + |∇ψ|²)_t + S`
//! with history `η(0) = ψ(0)`, i.e. `ψ` vanishing for negative times.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::spectral::{Field, Grid};
use crate::state::{init_state, HistoryConfig, StateVector, SystemParams};

use super::Forcing;

/// Convolution tolerance for kernels without a closed form.
pub const CONVOLUTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialProfile {
    /// `cos(Σ_a 2π k_a x_a / L_a)`
    Mode([i64; 3]),
    /// `exp(sin(2π x_0 / L_0))`, smooth but not band-limited.
    ExpSine,
}

#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    amplitude: f64,
    omega: f64,
    x: Field,
    lap_x: Field,
    grad_x2: Field,
}

impl ManufacturedSolution {
    pub fn new(grid: &Arc<Grid>, profile: SpatialProfile, amplitude: f64, omega: f64) -> Self {
        let dim = grid.dim();
        let (x, lap_x, grad_x2) = match profile {
            SpatialProfile::Mode(k) => {
                let kv: Vec<f64> = (0..dim)
                    .map(|a| 2.0 * PI * k[a] as f64 / grid.box_length(a))
                    .collect();
                let k2: f64 = kv.iter().map(|v| v * v).sum();
                let phase = |p: &[f64]| -> f64 { kv.iter().zip(p).map(|(a, b)| a * b).sum() };
                (
                    Field::from_fn(grid, |p| phase(p).cos()),
                    Field::from_fn(grid, |p| -k2 * phase(p).cos()),
                    Field::from_fn(grid, |p| k2 * phase(p).sin().powi(2)),
                )
            }
            SpatialProfile::ExpSine => {
                let a = 2.0 * PI / grid.box_length(0);
                let th = move |p: &[f64]| a * p[0];
                (
                    Field::from_fn(grid, |p| th(p).sin().exp()),
                    Field::from_fn(grid, |p| {
                        let t = th(p);
                        a * a * (t.cos().powi(2) - t.sin()) * t.sin().exp()
                    }),
                    Field::from_fn(grid, |p| {
                        let t = th(p);
                        a * a * t.cos().powi(2) * (2.0 * t.sin()).exp()
                    }),
                )
            }
        };
        Self {
            amplitude,
            omega,
            x,
            lap_x,
            grad_x2,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `d^n/dt^n cos(ωt)`.
    fn time_derivative(&self, n: u32, t: f64) -> f64 {
        let w = self.omega;
        let (c, s) = ((w * t).cos(), (w * t).sin());
        match n % 4 {
            0 => w.powi(n as i32) * c,
            1 => -w.powi(n as i32) * s,
            2 => -w.powi(n as i32) * c,
            _ => w.powi(n as i32) * s,
        }
    }

    /// `∂_t^n ψ` at time `t`.
    pub fn derivative(&self, n: u32, t: f64) -> Field {
        self.x.scaled(self.amplitude * self.time_derivative(n, t))
    }

    pub fn psi(&self, t: f64) -> Field {
        self.derivative(0, t)
    }

    pub fn initial_state(&self, params: &SystemParams, history: &HistoryConfig) -> Result<StateVector> {
        init_state(
            params,
            &self.derivative(0, 0.0),
            &self.derivative(1, 0.0),
            &self.derivative(2, 0.0),
            history,
        )
    }

    /// Source term making `ψ` exact; the quadratic terms enter only when
    /// `nonlinear` is set.
    pub fn source(&self, params: &SystemParams, t: f64, nonlinear: bool) -> Result<Field> {
        let a = self.amplitude;
        let d: Vec<f64> = (0..4).map(|n| self.time_derivative(n, t)).collect();
        let conv = memory_convolution(params.kernel(), self.omega, t)?;
        let lap_coeff = a * (-params.c2() * d[0] - params.b() * d[1] + conv);
        let mut s = self.x.scaled(a * (params.tau() * d[3] + d[2]));
        s.axpy(lap_coeff, &self.lap_x);
        if nonlinear {
            let x2 = self.x.mul(&self.x);
            s.axpy(-2.0 * params.k() * a * a * d[1] * d[2], &x2);
            s.axpy(-2.0 * a * a * d[0] * d[1], &self.grad_x2);
        }
        Ok(s)
    }
}

/// The manufactured source as a [`Forcing`].
pub struct ManufacturedForcing<'a> {
    pub solution: &'a ManufacturedSolution,
    pub params: &'a SystemParams,
    pub nonlinear: bool,
}

impl Forcing for ManufacturedForcing<'_> {
    fn source(&self, t: f64) -> Result<Option<Field>> {
        self.solution
            .source(self.params, t, self.nonlinear)
            .map(Some)
    }
}

/// `∫₀^t g(s) cos(ω(t − s)) ds`; closed form for the exponential kernel,
/// adaptive Simpson (tolerance [`CONVOLUTION_TOL`]) otherwise.
pub fn memory_convolution(kernel: &MemoryKernel, omega: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative time {t}")));
    }
    match kernel {
        MemoryKernel::Memoryless => Ok(0.0),
        MemoryKernel::Exponential { m, c2, tau_r, .. } => {
            let a = m * c2;
            let l = 1.0 / tau_r;
            let (c, s) = ((omega * t).cos(), (omega * t).sin());
            Ok(a * (l * c + omega * s - l * (-l * t).exp()) / (l * l + omega * omega))
        }
        MemoryKernel::Tabulated(_) => {
            let upper = t.min(kernel.support_end());
            let f = |s: f64| -> f64 {
                kernel.eval(s).map(|(g, _, _)| g).unwrap_or(0.0) * (omega * (t - s)).cos()
            };
            Ok(adaptive_simpson(&f, 0.0, upper, CONVOLUTION_TOL))
        }
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
