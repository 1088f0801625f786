use std::f64::consts::PI;
use std::sync::Arc;

use jmgt_core::analysis::dissipation::{verify_dissipation, Functional};
use jmgt_core::analysis::global::bump_data;
use jmgt_core::analysis::{global_bound_experiment, picard_solve, GlobalConfig, PicardConfig, Verdict};
use jmgt_core::dynamics::{simulate, MemoryMode, RhsConfig, SimulationConfig, Unforced};
use jmgt_core::energy::{EnergyObserver, EnergyReport};
use jmgt_core::kernel::MemoryKernel;
use jmgt_core::spectral::{Field, Grid};
use jmgt_core::state::{init_state, HistoryConfig, SystemParams};

fn grid() -> Arc<Grid> {
    Grid::cube(1, 64, 20.0 * PI).unwrap()
}

fn trajectory(params: &SystemParams, nonlinear: bool, p: usize, amplitude: f64) -> EnergyReport {
    let g = grid();
    let psi = Field::from_fn(&g, |x| amplitude * (x[0].cos() + 0.5 * (0.3 * x[0]).sin()));
    let v = Field::from_fn(&g, |x| amplitude * 0.2 * (0.5 * x[0]).cos());
    let z = Field::zeros(&g);
    let (history, mode) = if params.kernel().is_memoryless() {
        (HistoryConfig::Closure, MemoryMode::Closure)
    } else {
        (HistoryConfig::Dafermos { n_s: 256, s_max: 30.0 }, MemoryMode::Dafermos)
    };
    let s = init_state(params, &psi, &v, &z, &history).unwrap();
    let rhs = if nonlinear {
        RhsConfig::nonlinear(mode)
    } else {
        RhsConfig::linear(mode)
    };
    let sim = SimulationConfig::new(4.0, 2e-3, rhs).with_stride(25);
    let mut obs = EnergyObserver::new(params, p, nonlinear);
    simulate(params, s, &sim, &Unforced, &mut [&mut obs]).unwrap();
    obs.report
}

fn exponential(m: f64, c2: f64) -> MemoryKernel {
    MemoryKernel::exponential(m, c2, 1.0).unwrap()
}

#[test]
fn every_check_passes_on_the_reference_trajectory() {
    let p = SystemParams::new(1.0, 1.5, 1.0, 1.0, exponential(0.2, 1.0)).unwrap();
    let r = trajectory(&p, false, 1, 1.0);
    for kappa in 0..=1 {
        for which in [Functional::E1, Functional::E2, Functional::W, Functional::Lyapunov] {
            let v = verify_dissipation(&r, which, &p, kappa).unwrap();
            assert!(v.pass, "{v:?}");
        }
    }
}

#[test]
fn nonlinear_small_data_checks_pass_with_source_terms() {
    let p = SystemParams::new(1.0, 1.5, 1.0, 1.0, exponential(0.2, 1.0)).unwrap();
    let r = trajectory(&p, true, 0, 0.05);
    for which in [Functional::E1, Functional::E2, Functional::W, Functional::Lyapunov] {
        let v = verify_dissipation(&r, which, &p, 0).unwrap();
        assert!(v.pass, "{v:?}");
    }
}

#[test]
fn first_energy_check_separates_the_regimes() {
    let matrix = [
        (1.0, 1.5, 1.0, Some(0.2)),
        (0.5, 1.0, 1.0, Some(0.1)),
        (2.0, 3.0, 1.0, None),
        (1.0, 2.0, 1.5, Some(0.3)),
        (1.0, 0.5, 1.0, None),
        (1.0, 0.8, 1.0, Some(0.2)),
        (2.0, 1.0, 1.0, None),
    ];
    for (tau, b, c2, m) in matrix {
        let kernel = m.map(|m| exponential(m, c2)).unwrap_or(MemoryKernel::Memoryless);
        let p = SystemParams::new(tau, b, c2, 1.0, kernel).unwrap();
        let r = trajectory(&p, false, 0, 1.0);
        let v = verify_dissipation(&r, Functional::E1, &p, 0).unwrap();
        assert_eq!(v.pass, b > tau * c2, "τ={tau} b={b} c²={c2}: {v:?}");
    }
}

#[test]
fn picard_contraction_factor_grows_with_the_horizon() {
    let p = SystemParams::new(1.0, 1.5, 1.0, 1.0, exponential(0.2, 1.0)).unwrap();
    let g = Grid::cube(1, 32, 2.0 * PI).unwrap();
    let psi = Field::from_fn(&g, |x| 0.3 * x[0].sin());
    let v = Field::from_fn(&g, |x| 0.3 * (2.0 * x[0]).cos());
    let z = Field::zeros(&g);
    let s = init_state(&p, &psi, &v, &z, &HistoryConfig::Closure).unwrap();
    let q: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&t| {
            let mut cfg = PicardConfig::new(t, 0.005);
            cfg.memory_mode = MemoryMode::Closure;
            cfg.max_iter = 4;
            cfg.tol = 0.0;
            let (r, _) = picard_solve(&p, &s, &cfg).unwrap();
            r.q.unwrap()
        })
        .collect();
    assert!(q.windows(2).all(|w| w[1] > w[0]), "{q:?}");
    assert!(q[2] / q[0] > 2.0, "{q:?}");
}

#[test]
fn small_data_verdict_survives_refinement() {
    let p = SystemParams::new(1.0, 1.5, 1.0, 1.0, exponential(0.2, 1.0)).unwrap();
    let cfg = GlobalConfig {
        horizon: 20.0,
        ..GlobalConfig::default()
    };
    let verdict = |n: usize| {
        let g = Grid::cube(1, n, 20.0 * PI).unwrap();
        let (a, b) = bump_data(&g, 3.0);
        global_bound_experiment(&p, &a, &b, 1e-3, &cfg).unwrap()
    };
    let coarse = verdict(128);
    let fine = verdict(256);
    assert_eq!(coarse.verdict, Verdict::Bounded);
    assert_eq!(fine.verdict, coarse.verdict);
    assert!((fine.max_norm - coarse.max_norm).abs() < 1e-6 * coarse.max_norm);
}
