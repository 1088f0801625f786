//! Scalar bootstrap bound for `M ≤ C1 + C2 M^κ`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StraussBound {
    pub feasible: bool,
    /// `C1 / (1 − 1/κ)`
    pub bound: f64,
    /// Feasibility threshold `(1 − 1/κ) κ^{−1/(κ−1)}` for `C1 C2^{1/(κ−1)}`.
    pub threshold: f64,
    /// `C1 C2^{1/(κ−1)}`
    pub product: f64,
}

/// Feasible iff `C1 C2^{1/(κ−1)} < (1 − 1/κ) κ^{−1/(κ−1)}`; the bound is then
/// `M < C1 / (1 − 1/κ)`.
pub fn strauss_bound(c1: f64, c2: f64, kappa: f64) -> Result<StraussBound> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must exceed 1, got {kappa}")));
    }
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constants must be positive: C1={c1}, C2={c2}"
        )));
    }
    let e = 1.0 / (kappa - 1.0);
    let threshold = (1.0 - 1.0 / kappa) * kappa.powf(-e);
    let product = c1 * c2.powf(e);
    Ok(StraussBound {
        feasible: product < threshold,
        bound: c1 / (1.0 - 1.0 / kappa),
        threshold,
        product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_case() {
        let r = strauss_bound(0.1, 1.0, 2.0).unwrap();
        assert!(r.feasible);
        assert!((r.bound - 0.2).abs() < 1e-15);
        assert!((r.threshold - 0.25).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_infeasible() {
        assert!(!strauss_bound(0.25, 1.0, 2.0).unwrap().feasible);
    }

    #[test]
    fn three_halves_case() {
        let r = strauss_bound(0.01, 2.0, 1.5).unwrap();
        assert!((r.threshold - 4.0 / 27.0).abs() < 1e-15);
        assert!((r.product - 0.04).abs() < 1e-15);
        assert!(r.feasible);
        assert!((r.bound - 0.03).abs() < 1e-15);
    }

    #[test]
    fn exponent_at_most_one_is_rejected() {
        assert!(strauss_bound(0.1, 1.0, 1.0).is_err());
        assert!(strauss_bound(0.1, 1.0, 0.5).is_err());
        assert!(strauss_bound(0.0, 1.0, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn larger_constants_never_restore_feasibility(
            c1 in 1e-3f64..1.0, c2 in 1e-3f64..10.0, k in 1.1f64..4.0, f in 1.0f64..3.0
        ) {
            let base = strauss_bound(c1, c2, k).unwrap().feasible;
            let up1 = strauss_bound(c1 * f, c2, k).unwrap().feasible;
            let up2 = strauss_bound(c1, c2 * f, k).unwrap().feasible;
            prop_assert!(base || !up1);
            prop_assert!(base || !up2);
        }
    }
}
