//! Turns a validated [`RunConfig`] into core objects.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use jmgt_core::analysis::global::bump_data;
use jmgt_core::analysis::sampling::band_limited_field;
use jmgt_core::analysis::SampleSpec;
use jmgt_core::dynamics::{MemoryMode, RhsConfig};
use jmgt_core::io::read_checkpoint;
use jmgt_core::kernel::MemoryKernel;
use jmgt_core::spectral::{Field, Grid};
use jmgt_core::state::{init_state, HistoryConfig, HistoryGrid, HistoryWeights, StateVector, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{HistoryModeSpec, KernelKind, Profile, RunConfig};
use crate::error::CliError;

pub fn kernel(config: &RunConfig) -> Result<MemoryKernel, CliError> {
    let k = &config.kernel;
    let c2 = config.params.c2;
    let kernel = match k.kind {
        KernelKind::Exponential => match k.zeta {
            Some(z) => MemoryKernel::exponential_with_zeta(k.m, c2, k.tau_r, z),
            None => MemoryKernel::exponential(k.m, c2, k.tau_r),
        },
        KernelKind::Tabulated => {
            let path = k.file.as_ref().expect("validated");
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            MemoryKernel::from_csv_reader(BufReader::new(file), k.zeta)
        }
        KernelKind::Memoryless => Ok(MemoryKernel::Memoryless),
        KernelKind::Gaussian => MemoryKernel::gaussian_counterexample(k.a),
    };
    kernel.map_err(|e| CliError::Config(format!("kernel: {e}")))
}

pub fn params(config: &RunConfig) -> Result<SystemParams, CliError> {
    let p = &config.params;
    SystemParams::new(p.tau, p.b, p.c2, p.k, kernel(config)?).map_err(|e| CliError::Config(format!("params: {e}")))
}

pub fn grid(config: &RunConfig) -> Result<Arc<Grid>, CliError> {
    Grid::cube(config.grid.dim, config.grid.points, config.grid.length)
        .map_err(|e| CliError::Config(format!("grid: {e}")))
}

pub fn history(config: &RunConfig) -> HistoryConfig {
    match config.history.mode {
        HistoryModeSpec::Dafermos => HistoryConfig::Dafermos {
            n_s: config.history.n_s,
            s_max: config.history.s_max,
        },
        HistoryModeSpec::Closure => HistoryConfig::Closure,
    }
}

pub fn memory_mode(config: &RunConfig) -> MemoryMode {
    match config.history.mode {
        HistoryModeSpec::Dafermos => MemoryMode::Dafermos,
        HistoryModeSpec::Closure => MemoryMode::Closure,
    }
}

pub fn rhs(config: &RunConfig) -> RhsConfig {
    let mut r = if config.run.nonlinear {
        RhsConfig::nonlinear(memory_mode(config))
    } else {
        RhsConfig::linear(memory_mode(config))
    };
    r.dealias = config.run.dealias;
    r
}

pub fn history_weights(config: &RunConfig, params: &SystemParams) -> Result<Arc<HistoryWeights>, CliError> {
    let g = HistoryGrid::new(config.history.n_s, config.history.s_max)?;
    Ok(Arc::new(HistoryWeights::new(params.kernel(), g)?))
}

/// Energies need a resolved history unless the kernel carries no memory.
pub fn require_energies(config: &RunConfig, params: &SystemParams) -> Result<(), CliError> {
    if config.history.mode == HistoryModeSpec::Closure && params.mass() > 0.0 {
        return Err(CliError::Config(
            "history.mode: closure keeps no resolved history, so energies are unavailable; \
             use dafermos or a memoryless kernel"
                .into(),
        ));
    }
    Ok(())
}

/// `(ψ₀, ψ₁, ψ₂)` for the analytic profiles.
pub fn initial_fields(config: &RunConfig, grid: &Arc<Grid>) -> Result<(Field, Field, Field), CliError> {
    let a = config.initial.amplitude;
    let z = Field::zeros(grid);
    Ok(match config.initial.profile {
        Profile::Zero | Profile::File => (z.clone(), z.clone(), z),
        Profile::SingleMode => {
            let mode = &config.initial.mode;
            let dim = grid.dim();
            let psi = Field::from_fn(grid, |x| {
                let arg: f64 = (0..dim)
                    .map(|d| 2.0 * PI * *mode.get(d).unwrap_or(&0) as f64 * x[d] / grid.box_length(d))
                    .sum();
                a * arg.cos()
            });
            (psi, z.clone(), z)
        }
        Profile::GaussianBump => {
            let (p0, p1) = bump_data(grid, config.initial.width);
            (p0.scaled(a), p1.scaled(a), z)
        }
        Profile::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let spec = SampleSpec {
                max_mode: config.verify.max_mode,
                ..SampleSpec::default()
            };
            let p0 = band_limited_field(grid, &mut rng, &spec)?;
            let p1 = band_limited_field(grid, &mut rng, &spec)?;
            (p0.scaled(a), p1.scaled(a), z)
        }
    })
}

pub fn initial_state(config: &RunConfig, params: &SystemParams, grid: &Arc<Grid>) -> Result<StateVector, CliError> {
    if config.initial.profile == Profile::File {
        let path = config.initial.file.as_ref().expect("validated");
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let (header, state) = read_checkpoint(BufReader::new(file), params)
            .map_err(|e| CliError::Config(format!("initial.file {}: {e}", path.display())))?;
        if header.dim != grid.dim() || header.points != grid.points_per_axis() || header.lengths != grid.box_lengths() {
            return Err(CliError::Config(format!(
                "initial.file {}: checkpoint grid differs from [grid]",
                path.display()
            )));
        }
        let resolved = header.history.is_some();
        if resolved != (config.history.mode == HistoryModeSpec::Dafermos) {
            return Err(CliError::Config(format!(
                "initial.file {}: checkpoint history representation differs from history.mode",
                path.display()
            )));
        }
        if let Some((n_s, s_max)) = header.history {
            if n_s != config.history.n_s || s_max != config.history.s_max {
                return Err(CliError::Config(format!(
                    "initial.file {}: checkpoint history grid differs from [history]",
                    path.display()
                )));
            }
        }
        return Ok(state.scaled(config.initial.amplitude));
    }
    let (p0, p1, p2) = initial_fields(config, grid)?;
    Ok(init_state(params, &p0, &p1, &p2, &history(config))?)
}
