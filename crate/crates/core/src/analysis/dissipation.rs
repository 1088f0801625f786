//! Discrete checks of the energy inequalities along a recorded trajectory.
//!
//! For a functional `Φ` with dissipation `D` and right side `R` the check is
//! the integrated form over each sample interval,
//! `Φ(t_{j+1}) − Φ(t_j) + ∫ D − ∫ R ≤ tol`, with `tol = 1e−6 · max_j |Φ(t_j)|`.
//! The integrals use the four-point cubic rule on uniform stretches and the
//! trapezoid rule elsewhere.

use serde::Serialize;

use crate::energy::{EnergyReport, KappaSample, LyapunovWeights};
use crate::error::{Error, Result};
use crate::state::SystemParams;

pub const RELATIVE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    E1,
    E2,
    W,
    Lyapunov,
}

impl Functional {
    pub fn as_str(self) -> &'static str {
        match self {
            Functional::E1 => "E1",
            Functional::E2 => "E2",
            Functional::W => "W",
            Functional::Lyapunov => "Lyapunov",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovFit {
    pub weights: LyapunovWeights,
    /// Largest `c` with `d𝓛/dt + c·D ≤ R` on every interval.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DissipationVerdict {
    pub functional: Functional,
    pub kappa: usize,
    /// Largest positive residual of the discrete inequality.
    pub violation: f64,
    pub t_worst: f64,
    pub tolerance: f64,
    /// Largest increase `Φ(t_{j+1}) − Φ(t_j)` between samples.
    pub monotone_violation: f64,
    /// `b − τc²` for the energy checks.
    pub damping: Option<f64>,
    pub lyapunov: Option<LyapunovFit>,
    pub pass: bool,
}

/// Integral of `y` over `[t_j, t_{j+1}]`.
fn interval_integral(t: &[f64], y: &[f64], j: usize) -> f64 {
    let h = t[j + 1] - t[j];
    let uniform = |a: usize, b: usize| -> bool {
        (a..b).all(|i| ((t[i + 1] - t[i]) - h).abs() <= 1e-9 * h)
    };
    let n = t.len();
    if n >= 4 {
        if j >= 1 && j + 2 < n && uniform(j - 1, j + 2) {
            return h / 24.0 * (-y[j - 1] + 13.0 * y[j] + 13.0 * y[j + 1] - y[j + 2]);
        }
        if j + 3 < n && uniform(j, j + 3) {
            return h / 24.0 * (9.0 * y[j] + 19.0 * y[j + 1] - 5.0 * y[j + 2] + y[j + 3]);
        }
        if j >= 2 && uniform(j - 2, j + 1) {
            return h / 24.0 * (y[j - 2] - 5.0 * y[j - 1] + 19.0 * y[j] + 9.0 * y[j + 1]);
        }
    }
    0.5 * h * (y[j] + y[j + 1])
}

fn series(report: &EnergyReport, kappa: usize, f: impl Fn(&KappaSample) -> f64) -> Vec<f64> {
    report.series(kappa, f)
}

fn check_report(report: &EnergyReport, kappa: usize) -> Result<()> {
    if report.samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if kappa > report.p {
        return Err(Error::InvalidOrder {
            order: kappa,
            allowed: "at most the recorded level",
        });
    }
    Ok(())
}

struct Residuals {
    violation: f64,
    t_worst: f64,
    monotone: f64,
    tolerance: f64,
}

fn residuals(t: &[f64], phi: &[f64], diss: &[f64], rhs: &[f64]) -> Residuals {
    let scale = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Residuals {
        violation: 0.0,
        t_worst: t[0],
        monotone: 0.0,
        tolerance: RELATIVE_TOL * scale,
    };
    for j in 0..t.len() - 1 {
        let inc = phi[j + 1] - phi[j];
        out.monotone = out.monotone.max(inc);
        let r = inc + interval_integral(t, diss, j) - interval_integral(t, rhs, j);
        if r > out.violation {
            out.violation = r;
            out.t_worst = t[j + 1];
        }
    }
    out
}

/// Checks one of the dissipation relations on the recorded samples at level `κ`.
pub fn verify_dissipation(
    report: &EnergyReport,
    which: Functional,
    params: &SystemParams,
    kappa: usize,
) -> Result<DissipationVerdict> {
    check_report(report, kappa)?;
    let t = report.times();
    let tau = params.tau();
    let damping = params.b() - tau * params.c2();
    let (phi, diss, rhs, damping) = match which {
        Functional::E1 => (
            series(report, kappa, |k| k.e1),
            series(report, kappa, |k| damping * k.grad_v2 + 0.5 * k.hist_dg1),
            series(report, kappa, |k| k.rhs.e1),
            Some(damping),
        ),
        Functional::E2 => (
            series(report, kappa, |k| k.e2),
            series(report, kappa, |k| damping * k.lap_v2 + 0.5 * k.hist_dg2),
            series(report, kappa, |k| k.rhs.e2),
            Some(damping),
        ),
        Functional::W => {
            let cg2 = params.cg2();
            let d = params.b() - tau * cg2;
            let mass = params.mass();
            (
                series(report, kappa, |k| 0.5 * k.w2),
                series(report, kappa, |k| k.w2 / (2.0 * tau)),
                series(report, kappa, |k| {
                    1.5 / tau * (cg2 * cg2 * k.lap_psi_tau_v2 + d * d * k.lap_v2 + mass * k.hist_g2)
                        + k.rhs.w / tau
                }),
                None,
            )
        }
        Functional::Lyapunov => return verify_lyapunov(report, params, kappa),
    };
    let r = residuals(&t, &phi, &diss, &rhs);
    let coefficient_ok = damping.is_none_or(|d| d >= -crate::state::CRITICAL_TOL);
    Ok(DissipationVerdict {
        functional: which,
        kappa,
        violation: r.violation,
        t_worst: r.t_worst,
        tolerance: r.tolerance,
        monotone_violation: r.monotone,
        damping,
        lyapunov: None,
        pass: coefficient_ok && r.violation <= r.tolerance,
    })
}

/// Weight grid searched by [`fit_lyapunov`].
pub const L1_GRID: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
pub const L2_GRID: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
pub const EPS_GRID: [f64; 4] = [0.01, 0.05, 0.1, 0.2];

/// Largest `c` such that `d𝓛/dt + c·D ≤ R` holds on every sample interval,
/// with `D = ‖∇^{κ+1}v‖² + ‖∇^{κ+1}η‖²_{−g′} + 𝓔₂ + ‖∇^κ w‖²`.
pub fn lyapunov_rate(
    report: &EnergyReport,
    params: &SystemParams,
    kappa: usize,
    weights: &LyapunovWeights,
) -> Result<(f64, f64)> {
    check_report(report, kappa)?;
    let t = report.times();
    let tau = params.tau();
    let LyapunovWeights { l1, l2, eps } = *weights;
    let lyap = series(report, kappa, |k| l1 * (k.e1 + k.e2 + eps * tau * k.w2) + k.f1 + l2 * k.f2);
    let diss = series(report, kappa, |k| k.grad_v2 + k.hist_dg1 + k.script_e2 + k.w2);
    let rhs = series(report, kappa, |k| {
        l1 * (k.rhs.e1 + k.rhs.e2 + 2.0 * eps * k.rhs.w) + k.rhs.f1 + l2 * k.rhs.f2
    });
    let mut rate = f64::INFINITY;
    let mut t_worst = t[0];
    for j in 0..t.len() - 1 {
        let d = interval_integral(&t, &diss, j);
        if d <= f64::MIN_POSITIVE {
            continue;
        }
        let c = (lyap[j] - lyap[j + 1] + interval_integral(&t, &rhs, j)) / d;
        if c < rate {
            rate = c;
            t_worst = t[j + 1];
        }
    }
    Ok((rate, t_worst))
}

/// Grid search over `(L1, L2, ε)` for the largest uniform rate.
pub fn fit_lyapunov(report: &EnergyReport, params: &SystemParams, kappa: usize) -> Result<(LyapunovFit, f64)> {
    let mut best: Option<(LyapunovFit, f64)> = None;
    for &l1 in &L1_GRID {
        for &l2 in &L2_GRID {
            for &eps in &EPS_GRID {
                let weights = LyapunovWeights { l1, l2, eps };
                let (rate, t) = lyapunov_rate(report, params, kappa, &weights)?;
                if best.is_none_or(|(b, _)| rate > b.rate) {
                    best = Some((LyapunovFit { weights, rate }, t));
                }
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}

fn verify_lyapunov(report: &EnergyReport, params: &SystemParams, kappa: usize) -> Result<DissipationVerdict> {
    let (fit, t_worst) = fit_lyapunov(report, params, kappa)?;
    let lyap = series(report, kappa, |k| {
        fit.weights.l1 * (k.e1 + k.e2 + fit.weights.eps * params.tau() * k.w2)
            + k.f1
            + fit.weights.l2 * k.f2
    });
    let monotone = lyap.windows(2).fold(0.0f64, |m, w| m.max(w[1] - w[0]));
    let pass = fit.rate > 0.0;
    Ok(DissipationVerdict {
        functional: Functional::Lyapunov,
        kappa,
        violation: if pass { 0.0 } else { -fit.rate },
        t_worst,
        tolerance: 0.0,
        monotone_violation: monotone,
        damping: None,
        lyapunov: Some(LyapunovFit {
            weights: fit.weights,
            rate: if fit.rate.is_finite() { fit.rate } else { f64::MAX },
        }),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergySample;
    use crate::kernel::MemoryKernel;

    fn params() -> SystemParams {
        SystemParams::new(1.0, 1.5, 1.0, 1.0, MemoryKernel::exponential(0.2, 1.0, 1.0).unwrap()).unwrap()
    }

    fn report(n: usize, f: impl Fn(f64) -> KappaSample) -> EnergyReport {
        let mut r = EnergyReport::new(0, LyapunovWeights::default());
        for i in 0..n {
            let t = i as f64 * 0.1;
            r.samples.push(EnergySample {
                t,
                kappa: vec![f(t)],
                lambda: 0.0,
                l2_psi: 0.0,
                l2_v: 0.0,
                l2_w: 0.0,
            });
        }
        r
    }

    #[test]
    fn cubic_rule_is_exact_for_cubics() {
        let t: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|x| x * x * x - 2.0 * x).collect();
        let exact = |a: f64, b: f64| (b.powi(4) - a.powi(4)) / 4.0 - (b * b - a * a);
        for j in 0..5 {
            assert!((interval_integral(&t, &y, j) - exact(t[j], t[j + 1])).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_trajectory_passes() {
        let r = report(5, |_| KappaSample::default());
        for which in [Functional::E1, Functional::E2, Functional::W, Functional::Lyapunov] {
            let v = verify_dissipation(&r, which, &params(), 0).unwrap();
            assert!(v.pass, "{which:?}");
            assert_eq!(v.violation, 0.0);
        }
    }

    #[test]
    fn exact_identity_passes_and_growth_fails() {
        // E1 = e^{−t}, dissipation (b − τc²)·grad_v2 = e^{−t}
        let ok = report(40, |t| KappaSample {
            e1: (-t).exp(),
            grad_v2: 2.0 * (-t).exp(),
            ..Default::default()
        });
        let v = verify_dissipation(&ok, Functional::E1, &params(), 0).unwrap();
        assert!(v.pass && v.violation < 5e-7, "{v:?}");
        let bad = report(40, |t| KappaSample {
            e1: (-t).exp(),
            grad_v2: 4.0 * (-t).exp(),
            ..Default::default()
        });
        assert!(!verify_dissipation(&bad, Functional::E1, &params(), 0).unwrap().pass);
    }

    #[test]
    fn negative_damping_fails_without_residual() {
        let p = SystemParams::new(1.0, 0.5, 1.0, 1.0, MemoryKernel::Memoryless).unwrap();
        let r = report(5, |_| KappaSample::default());
        let v = verify_dissipation(&r, Functional::E1, &p, 0).unwrap();
        assert!(!v.pass);
        assert_eq!(v.damping, Some(-0.5));
    }

    #[test]
    fn missing_level_is_an_error() {
        let r = report(5, |_| KappaSample::default());
        assert!(verify_dissipation(&r, Functional::E1, &params(), 1).is_err());
        assert!(verify_dissipation(&report(1, |_| KappaSample::default()), Functional::W, &params(), 0).is_err());
    }
}
