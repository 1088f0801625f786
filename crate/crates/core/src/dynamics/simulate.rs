use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{StateVector, SystemParams};

use super::{check_time_step, growth_proxy, step, Forcing, RhsConfig};

/// Receives snapshots during a run.
pub trait Observer {
    fn observe(&mut self, t: f64, state: &StateVector) -> Result<()>;
}

impl<F: FnMut(f64, &StateVector) -> Result<()>> Observer for F {
    fn observe(&mut self, t: f64, state: &StateVector) -> Result<()> {
        self(t, state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub dt: f64,
    /// Observers fire every `stride` steps (and at the final time).
    pub stride: usize,
    pub rhs: RhsConfig,
    /// Growth-proxy factor treated as blow-up.
    pub blowup_factor: f64,
}

impl SimulationConfig {
    pub fn new(horizon: f64, dt: f64, rhs: RhsConfig) -> Self {
        Self {
            horizon,
            dt,
            stride: 1,
            rhs,
            blowup_factor: 1e12,
        }
    }

    pub fn with_stride(self, stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowUp {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct SimulationOutcome {
    /// Last finite state.
    pub state: StateVector,
    pub t: f64,
    pub steps: usize,
    pub blowup: Option<BlowUp>,
    pub proxy_initial: f64,
    pub proxy_final: f64,
}

/// Advances `initial` to the horizon, or until blow-up is detected.
///
/// Blow-up (a non-finite value or the growth proxy exceeding
/// `blowup_factor` times its initial value) ends the run early and is
/// reported in the outcome rather than as an error.
pub fn simulate(
    params: &SystemParams,
    initial: StateVector,
    config: &SimulationConfig,
    forcing: &dyn Forcing,
    observers: &mut [&mut dyn Observer],
) -> Result<SimulationOutcome> {
    if !(config.horizon.is_finite() && config.horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!("horizon {}", config.horizon)));
    }
    check_time_step(&initial, config.dt)?;
    let steps = if config.horizon == 0.0 {
        0
    } else {
        ((config.horizon / config.dt) - 1e-9).ceil().max(1.0) as usize
    };
    let proxy_initial = growth_proxy(&initial)?;
    let threshold = config.blowup_factor * proxy_initial;

    for obs in observers.iter_mut() {
        obs.observe(0.0, &initial)?;
    }
    let mut state = initial;
    let mut t = 0.0;
    let mut proxy = proxy_initial;
    for n in 0..steps {
        let dt = if n + 1 == steps {
            config.horizon - n as f64 * config.dt
        } else {
            config.dt
        };
        let next = match step(&state, params, &config.rhs, t, dt, forcing) {
            Ok(next) => next,
            Err(Error::BlowUp { t: tb }) => {
                return Ok(SimulationOutcome {
                    state,
                    t,
                    steps: n,
                    blowup: Some(BlowUp {
                        t: tb,
                        reason: "non-finite value".into(),
                    }),
                    proxy_initial,
                    proxy_final: proxy,
                });
            }
            Err(e) => return Err(e),
        };
        let next_t = if n + 1 == steps {
            config.horizon
        } else {
            (n + 1) as f64 * config.dt
        };
        let next_proxy = growth_proxy(&next)?;
        if proxy_initial > 0.0 && next_proxy > threshold {
            return Ok(SimulationOutcome {
                state: next,
                t: next_t,
                steps: n + 1,
                blowup: Some(BlowUp {
                    t: next_t,
                    reason: "growth proxy exceeded threshold".into(),
                }),
                proxy_initial,
                proxy_final: next_proxy,
            });
        }
        state = next;
        t = next_t;
        proxy = next_proxy;
        if (n + 1) % config.stride == 0 || n + 1 == steps {
            for obs in observers.iter_mut() {
                obs.observe(t, &state)?;
            }
        }
    }
    Ok(SimulationOutcome {
        state,
        t,
        steps,
        blowup: None,
        proxy_initial,
        proxy_final: proxy,
    })
}
