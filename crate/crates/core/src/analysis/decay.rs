use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// `λ` in `y ≈ C e^{−λt}`.
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `log y` against `t` over the tail half of the series.
pub fn fit_decay(t: &[f64], y: &[f64]) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(Error::InvalidArgument("time and value lengths differ".into()));
    }
    let start = t.len() / 2;
    let (tt, yy) = (&t[start..], &y[start..]);
    if tt.len() < 2 {
        return Err(Error::InvalidArgument("need at least two tail points".into()));
    }
    if let Some(bad) = yy.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidArgument(format!("non-positive tail value {bad}")));
    }
    let n = tt.len() as f64;
    let logs: Vec<f64> = yy.iter().map(|v| v.ln()).collect();
    let mt = tt.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, l) in tt.iter().zip(&logs) {
        sxy += (x - mt) * (l - ml);
        sxx += (x - mt).powi(2);
        syy += (l - ml).powi(2);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("tail times are all equal".into()));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = tt
        .iter()
        .zip(&logs)
        .map(|(x, l)| (l - ml - slope * (x - mt)).powi(2))
        .sum();
    // a flat series is fitted exactly
    let r_squared = if syy <= 1e-300 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        points: tt.len(),
    })
}
