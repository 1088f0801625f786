//! Run configuration: TOML with every section optional and unknown keys
//! rejected. Omitted values take the reference configuration.
//!
//! ```toml
//! seed = 0
//!
//! [grid]
//! dim = 1              # 1, 2 or 3
//! points = 128         # points per axis, power of two
//! length = 62.83185307179586
//!
//! [params]
//! tau = 1.0
//! b = 1.5
//! c2 = 1.0
//! k = 1.0
//!
//! [kernel]
//! kind = "exponential" # exponential | tabulated | memoryless | gaussian
//! m = 0.2              # exponential: g(s) = m c² e^{−s/τ_r}
//! tau_r = 1.0
//! # zeta = 0.5         # optional decay-ratio override (exponential, tabulated)
//! # file = "g.csv"     # tabulated: two columns s,g
//! # a = 0.2            # gaussian: g(s) = a e^{−s²}
//!
//! [history]
//! mode = "dafermos"    # dafermos | closure
//! n_s = 256
//! s_max = 30.0
//!
//! [initial]
//! profile = "single-mode" # zero | single-mode | gaussian-bump | random | file
//! amplitude = 1.0
//! mode = [10, 0, 0]    # single-mode wave indices
//! width = 3.0          # gaussian-bump width
//! # file = "state.ckpt"
//!
//! [run]
//! horizon = 20.0
//! dt = 0.001
//! stride = 100
//! nonlinear = false
//! dealias = false
//! p = 0
//! checkpoint = false
//! ```
//!
//! The `verify`, `scan`, `picard`, `resolvent` and `convergence` sections are
//! described on their structs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSpec,
    pub params: ParamsSpec,
    pub kernel: KernelSpec,
    pub history: HistorySpec,
    pub initial: InitialSpec,
    pub run: RunSpec,
    pub verify: VerifySpec,
    pub scan: ScanSpec,
    pub picard: PicardSpec,
    pub resolvent: ResolventSpec,
    pub convergence: ConvergenceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            points: 128,
            length: 20.0 * PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSpec {
    pub tau: f64,
    pub b: f64,
    pub c2: f64,
    pub k: f64,
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            tau: 1.0,
            b: 1.5,
            c2: 1.0,
            k: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Exponential,
    Tabulated,
    Memoryless,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub m: f64,
    pub tau_r: f64,
    pub zeta: Option<f64>,
    pub file: Option<PathBuf>,
    pub a: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            kind: KernelKind::Exponential,
            m: 0.2,
            tau_r: 1.0,
            zeta: None,
            file: None,
            a: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryModeSpec {
    Dafermos,
    Closure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistorySpec {
    pub mode: HistoryModeSpec,
    pub n_s: usize,
    pub s_max: f64,
}

impl Default for HistorySpec {
    fn default() -> Self {
        Self {
            mode: HistoryModeSpec::Dafermos,
            n_s: 256,
            s_max: 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    SingleMode,
    GaussianBump,
    Random,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub mode: Vec<i64>,
    pub width: f64,
    pub file: Option<PathBuf>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            profile: Profile::SingleMode,
            amplitude: 1.0,
            mode: vec![10, 0, 0],
            width: 3.0,
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub horizon: f64,
    pub dt: f64,
    pub stride: usize,
    pub nonlinear: bool,
    pub dealias: bool,
    /// Highest energy level written to the time series.
    pub p: usize,
    /// Write the final state as `final.ckpt`.
    pub checkpoint: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            dt: 1e-3,
            stride: 100,
            nonlinear: false,
            dealias: false,
            p: 0,
            checkpoint: false,
        }
    }
}

/// `[verify]`: sample counts and norm order for the sampled checks, and an
/// optional small-data global run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub samples: usize,
    /// Order `m` of the problem and standard norms.
    pub m: u32,
    /// Largest sampled mode index.
    pub max_mode: i64,
    pub global: bool,
    pub global_amplitude: f64,
    pub global_horizon: f64,
    pub global_dt: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            samples: 200,
            m: 2,
            max_mode: 4,
            global: false,
            global_amplitude: 1e-3,
            global_horizon: 50.0,
            global_dt: 0.01,
        }
    }
}

/// `[scan]`: the `(b/τc², mass)` grid; other settings come from the main
/// sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    pub b_ratios: Vec<f64>,
    pub masses: Vec<f64>,
    pub horizon: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            b_ratios: vec![0.5, 1.0, 1.5],
            masses: vec![0.0, 0.1, 0.2],
            horizon: 20.0,
        }
    }
}

/// `[picard]`: horizon, step and stopping rule of the fixed-point iteration
/// on the configured data scaled by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSpec {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub scale: f64,
}

impl Default for PicardSpec {
    fn default() -> Self {
        Self {
            horizon: 0.25,
            dt: 0.005,
            tol: 1e-12,
            max_iter: 30,
            scale: 0.1,
        }
    }
}

/// `[resolvent]`: number of random data sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventSpec {
    pub samples: usize,
    pub m: u32,
}

impl Default for ResolventSpec {
    fn default() -> Self {
        Self { samples: 100, m: 2 }
    }
}

/// `[convergence]`: manufactured-solution studies on a 1D box of length `2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub dts: Vec<f64>,
    pub temporal_points: usize,
    pub points: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_horizon: f64,
    pub amplitude: f64,
    pub omega: f64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            dts: vec![0.2, 0.1, 0.05],
            temporal_points: 16,
            points: vec![8, 16, 32, 64],
            spatial_dt: 1e-3,
            spatial_horizon: 0.05,
            amplitude: 0.1,
            omega: 1.0,
        }
    }
}

/// Parses `value` as a TOML scalar or array, falling back to a bare string.
fn parse_override_value(raw: &str) -> Value {
    match toml::from_str::<BTreeMap<String, Value>>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn apply_override(root: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let mut table = root;
    for part in &path[..path.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{part}` is not a section")))?;
    }
    table.insert(path[path.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Reads `text` (or the defaults), applies `key=value` overrides and an
    /// optional seed, then validates.
    pub fn load(text: Option<&str>, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let mut root: toml::Table = match text {
            Some(t) => toml::from_str(t).map_err(|e| CliError::Config(e.to_string()))?,
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let mut config: RunConfig = Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if let Some(s) = seed {
            config.seed = s;
        }
        config.validate()?;
        Ok(config)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: &str| Err(CliError::Config(format!("{field}: {msg}")));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(1..=3).contains(&self.grid.dim) {
            return fail("grid.dim", "must be 1, 2 or 3");
        }
        if self.grid.points < 8 || !self.grid.points.is_power_of_two() {
            return fail("grid.points", "must be a power of two of at least 8");
        }
        if !positive(self.grid.length) {
            return fail("grid.length", "must be positive");
        }
        for (name, v) in [("params.tau", self.params.tau), ("params.b", self.params.b), ("params.c2", self.params.c2)] {
            if !positive(v) {
                return fail(name, "must be positive");
            }
        }
        if !self.params.k.is_finite() {
            return fail("params.k", "must be finite");
        }
        match self.kernel.kind {
            KernelKind::Exponential => {
                if !positive(self.kernel.m) {
                    return fail("kernel.m", "must be positive");
                }
                if !positive(self.kernel.tau_r) {
                    return fail("kernel.tau_r", "must be positive");
                }
            }
            KernelKind::Tabulated => {
                if self.kernel.file.is_none() {
                    return fail("kernel.file", "required for a tabulated kernel");
                }
            }
            KernelKind::Gaussian => {
                if !positive(self.kernel.a) {
                    return fail("kernel.a", "must be positive");
                }
            }
            KernelKind::Memoryless => {}
        }
        if self.history.mode == HistoryModeSpec::Dafermos {
            if self.history.n_s == 0 {
                return fail("history.n_s", "must be at least 1");
            }
            if !positive(self.history.s_max) {
                return fail("history.s_max", "must be positive");
            }
        }
        if !(self.initial.amplitude.is_finite() && self.initial.amplitude >= 0.0) {
            return fail("initial.amplitude", "must be finite and non-negative");
        }
        match self.initial.profile {
            Profile::SingleMode => {
                if self.initial.mode.is_empty() || self.initial.mode.len() > 3 {
                    return fail("initial.mode", "needs one to three wave indices");
                }
                let half = (self.grid.points / 2) as i64;
                if self.initial.mode.iter().any(|k| k.abs() >= half) {
                    return fail("initial.mode", "wave index must lie below N/2");
                }
            }
            Profile::GaussianBump => {
                if !positive(self.initial.width) {
                    return fail("initial.width", "must be positive");
                }
            }
            Profile::File => {
                if self.initial.file.is_none() {
                    return fail("initial.file", "required for the file profile");
                }
            }
            Profile::Zero | Profile::Random => {}
        }
        if !(self.run.horizon.is_finite() && self.run.horizon >= 0.0) {
            return fail("run.horizon", "must be finite and non-negative");
        }
        if !positive(self.run.dt) {
            return fail("run.dt", "must be positive");
        }
        if self.run.stride == 0 {
            return fail("run.stride", "must be at least 1");
        }
        if self.run.p > 6 {
            return fail("run.p", "must be at most 6");
        }
        if self.verify.m == 0 || self.verify.m > 6 {
            return fail("verify.m", "must lie in 1..=6");
        }
        if self.verify.max_mode < 0 || 3 * self.verify.max_mode as usize > self.grid.points {
            return fail("verify.max_mode", "must be non-negative and at most N/3");
        }
        if !positive(self.verify.global_amplitude) && self.verify.global {
            return fail("verify.global_amplitude", "must be positive");
        }
        if self.scan.b_ratios.iter().any(|r| !positive(*r)) {
            return fail("scan.b_ratios", "entries must be positive");
        }
        if self.scan.masses.iter().any(|m| !(m.is_finite() && *m >= 0.0 && *m < self.params.c2)) {
            return fail("scan.masses", "entries must lie in [0, c2)");
        }
        if !positive(self.scan.horizon) {
            return fail("scan.horizon", "must be positive");
        }
        if !(positive(self.picard.horizon) && positive(self.picard.dt)) {
            return fail("picard", "horizon and dt must be positive");
        }
        if !(self.picard.tol.is_finite() && self.picard.tol >= 0.0) {
            return fail("picard.tol", "must be non-negative");
        }
        if self.picard.max_iter == 0 {
            return fail("picard.max_iter", "must be at least 1");
        }
        if self.convergence.dts.iter().any(|d| !positive(*d)) {
            return fail("convergence.dts", "entries must be positive");
        }
        if self.convergence.points.iter().any(|n| *n < 8 || !n.is_power_of_two()) {
            return fail("convergence.points", "entries must be powers of two of at least 8");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_configuration() {
        let c = RunConfig::load(None, &[], None).unwrap();
        assert_eq!(c.grid.points, 128);
        assert!((c.grid.length - 20.0 * PI).abs() < 1e-12);
        assert_eq!((c.params.tau, c.params.b, c.params.c2, c.params.k), (1.0, 1.5, 1.0, 1.0));
        assert_eq!(c.kernel.kind, KernelKind::Exponential);
        assert_eq!((c.kernel.m, c.kernel.tau_r), (0.2, 1.0));
        assert_eq!((c.history.n_s, c.history.s_max), (256, 30.0));
        assert_eq!(c.run.dt, 1e-3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::load(Some("[params]\nbeta = 2.0\n"), &[], None).unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        assert!(RunConfig::load(Some("colour = 1\n"), &[], None).is_err());
        assert!(RunConfig::load(None, &["params.beta=1".into()], None).is_err());
    }

    #[test]
    fn overrides_use_dotted_paths_and_toml_values() {
        let c = RunConfig::load(
            Some("[params]\nb = 2.0\n"),
            &[
                "params.b=3.5".into(),
                "kernel.kind=memoryless".into(),
                "scan.masses=[0.0, 0.3]".into(),
                "run.nonlinear=true".into(),
            ],
            Some(9),
        )
        .unwrap();
        assert_eq!(c.params.b, 3.5);
        assert_eq!(c.kernel.kind, KernelKind::Memoryless);
        assert_eq!(c.scan.masses, vec![0.0, 0.3]);
        assert!(c.run.nonlinear);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn validation_names_the_field() {
        let err = RunConfig::load(None, &["grid.points=100".into()], None).unwrap_err();
        assert!(err.to_string().starts_with("grid.points"), "{err}");
        let err = RunConfig::load(None, &["params.tau=-1".into()], None).unwrap_err();
        assert!(err.to_string().starts_with("params.tau"), "{err}");
        assert!(RunConfig::load(None, &["nonsense".into()], None).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.params.b = 1.6;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
