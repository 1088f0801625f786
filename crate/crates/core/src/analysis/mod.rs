//! Numerical experiments built on the solver and the energy functionals.

use serde::Serialize;

pub mod commutator;
pub mod convergence;
pub mod decay;
pub mod dissipation;
pub mod generator;
pub mod global;
pub mod picard;
pub mod sampling;
pub mod scan;
pub mod strauss;

pub use commutator::{commutator_probe, CommutatorProbe};
pub use convergence::{spatial_study, temporal_study, ConvergenceTable, StudyConfig};
pub use decay::{fit_decay, DecayFit};
pub use dissipation::{verify_dissipation, DissipationVerdict, Functional};
pub use generator::{generator_dissipativity, resolvent_residual, resolvent_solve, GeneratorReport};
pub use global::{global_bound_experiment, smallness_sweep, GlobalConfig, GlobalOutcome};
pub use picard::{picard_solve, picard_vs_direct, PicardConfig, PicardResult};
pub use sampling::{norm_equivalence, NormEquivalence, SampleSpec};
pub use scan::{decay_scan, ScanConfig, ScanRow};
pub use strauss::{strauss_bound, StraussBound};

/// Long-time classification of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Decayed,
    Bounded,
    Growth,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Decayed => "decayed",
            Self::Bounded => "bounded",
            Self::Growth => "growth",
        }
    }

    /// Growth on blow-up or a tenfold rise of the growth proxy, decayed on a
    /// tenfold drop.
    pub fn from_proxy(initial: f64, last: f64, blew_up: bool) -> Self {
        if blew_up || !last.is_finite() || last > 10.0 * initial {
            Self::Growth
        } else if last < 0.1 * initial {
            Self::Decayed
        } else {
            Self::Bounded
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proxy_classification() {
        assert_eq!(Verdict::from_proxy(1.0, 0.05, false), Verdict::Decayed);
        assert_eq!(Verdict::from_proxy(1.0, 2.0, false), Verdict::Bounded);
        assert_eq!(Verdict::from_proxy(1.0, 11.0, false), Verdict::Growth);
        assert_eq!(Verdict::from_proxy(1.0, 0.0, true), Verdict::Growth);
        assert_eq!(Verdict::Growth.as_str(), "growth");
    }
}
