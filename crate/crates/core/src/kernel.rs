//! Memory kernels `g(s)` on the history half-line and the checks on them.
//!
//! The tabulated CSV schema is two numeric columns `s,g` with strictly
//! increasing `s` starting at `0`; an optional header row and `#` comment
//! lines are skipped. Between samples the kernel is the monotone
//! piecewise-cubic Hermite (Fritsch–Carlson) interpolant; past the last
//! sample it is zero.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum MemoryKernel {
    /// `g(s) = m c² exp(-s/τ_r)`.
    Exponential {
        m: f64,
        c2: f64,
        tau_r: f64,
        zeta: f64,
    },
    Tabulated(TabulatedKernel),
    /// `g ≡ 0`; only meaningful as the designated memoryless mode.
    Memoryless,
}

impl MemoryKernel {
    /// Exponential kernel with the claimed decay rate `ζ = 1/τ_r`.
    pub fn exponential(m: f64, c2: f64, tau_r: f64) -> Result<Self> {
        Self::exponential_with_zeta(m, c2, tau_r, 1.0 / tau_r)
    }

    pub fn exponential_with_zeta(m: f64, c2: f64, tau_r: f64, zeta: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::InvalidKernel(format!("relaxation parameter m = {m}")));
        }
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::InvalidKernel(format!("c^2 = {c2}")));
        }
        if !(tau_r.is_finite() && tau_r > 0.0) {
            return Err(Error::InvalidKernel(format!("relaxation time {tau_r}")));
        }
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(Error::InvalidKernel(format!("decay rate zeta = {zeta}")));
        }
        Ok(Self::Exponential {
            m,
            c2,
            tau_r,
            zeta,
        })
    }

    pub fn tabulated(s: Vec<f64>, g: Vec<f64>, zeta: Option<f64>) -> Result<Self> {
        TabulatedKernel::new(s, g, zeta).map(Self::Tabulated)
    }

    /// `a exp(-s²)` sampled on `[0, 8]`; concave near `s = 0`, so it breaks
    /// the convexity assumption while staying integrable and positive.
    pub fn gaussian_counterexample(a: f64) -> Result<Self> {
        let s: Vec<f64> = (0..=800).map(|i| i as f64 * 0.01).collect();
        let g = s.iter().map(|&x| a * (-x * x).exp()).collect();
        Self::tabulated(s, g, None)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, zeta: Option<f64>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, zeta)
    }

    pub fn from_csv_reader(reader: impl Read, zeta: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut s = Vec::new();
        let mut g = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Format(format!(
                    "kernel row {} has {} columns, expected 2",
                    row + 1,
                    record.len()
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    s.push(a);
                    g.push(b);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Format(format!(
                        "kernel row {} is not numeric",
                        row + 1
                    )))
                }
            }
        }
        Self::tabulated(s, g, zeta)
    }

    /// `(g, g′, g″)` at `s ≥ 0`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::NegativeHistoryTime(s));
        }
        Ok(match self {
            Self::Exponential { m, c2, tau_r, .. } => {
                let inv = 1.0 / tau_r;
                let g = m * c2 * (-s * inv).exp();
                (g, -inv * g, inv * inv * g)
            }
            Self::Tabulated(t) => t.eval(s),
            Self::Memoryless => (0.0, 0.0, 0.0),
        })
    }

    /// `∫₀^∞ g`, in closed form for every variant.
    pub fn total_mass(&self) -> f64 {
        match self {
            Self::Exponential { m, c2, tau_r, .. } => m * c2 * tau_r,
            Self::Tabulated(t) => t.integral_to(f64::INFINITY),
            Self::Memoryless => 0.0,
        }
    }

    /// `∫_a^b g` for `0 ≤ a ≤ b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Exponential { m, c2, tau_r, .. } => {
                m * c2 * tau_r * ((-a / tau_r).exp() - (-b / tau_r).exp())
            }
            Self::Tabulated(t) => t.integral_to(b) - t.integral_to(a),
            Self::Memoryless => 0.0,
        }
    }

    pub fn zeta(&self) -> f64 {
        match self {
            Self::Exponential { zeta, .. } => *zeta,
            Self::Tabulated(t) => t.zeta,
            Self::Memoryless => f64::INFINITY,
        }
    }

    /// Relaxation time of an exponential kernel.
    pub fn relaxation_time(&self) -> Option<f64> {
        match self {
            Self::Exponential { tau_r, .. } => Some(*tau_r),
            _ => None,
        }
    }

    pub fn is_memoryless(&self) -> bool {
        matches!(self, Self::Memoryless)
    }

    /// Whether the history obeys a local closure ODE.
    pub fn has_closure(&self) -> bool {
        matches!(self, Self::Exponential { .. } | Self::Memoryless)
    }

    /// Largest `s` at which `g` can be nonzero.
    pub fn support_end(&self) -> f64 {
        match self {
            Self::Tabulated(t) => *t.s.last().unwrap_or(&0.0),
            Self::Memoryless => 0.0,
            Self::Exponential { .. } => f64::INFINITY,
        }
    }
}

/// Modified squared speed `c² − ∫g`; must stay positive.
pub fn c_g_squared(kernel: &MemoryKernel, c2: f64) -> Result<f64> {
    if kernel.is_memoryless() {
        return Ok(c2);
    }
    let mass = kernel.total_mass();
    if mass > 0.0 && mass < c2 {
        Ok(c2 - mass)
    } else {
        Err(Error::InadmissibleKernel { mass, c2 })
    }
}

/// Composite trapezoid rule for `∫₀^{s_max} g` on `n` uniform cells.
pub fn trapezoid_mass(kernel: &MemoryKernel, s_max: f64, n: usize) -> Result<f64> {
    let ds = s_max / n as f64;
    let mut sum = 0.0;
    for j in 0..=n {
        let (g, _, _) = kernel.eval(j as f64 * ds)?;
        sum += if j == 0 || j == n { 0.5 * g } else { g };
    }
    Ok(sum * ds)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub pass: bool,
    /// Worst violation magnitude (zero when satisfied).
    pub worst: f64,
    /// History time of the worst violation, when pointwise.
    pub at: Option<f64>,
}

impl AssumptionCheck {
    fn from_violation(worst: f64, at: Option<f64>, tol: f64) -> Self {
        Self {
            pass: worst <= tol,
            worst,
            at,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub mass: f64,
    pub cg2: f64,
    pub zeta: f64,
    pub g1: AssumptionCheck,
    pub g2: AssumptionCheck,
    pub g3: AssumptionCheck,
    pub g4: AssumptionCheck,
}

impl KernelReport {
    pub fn all_pass(&self) -> bool {
        self.g1.pass && self.g2.pass && self.g3.pass && self.g4.pass
    }
}

/// Evaluates (G1)–(G4) on the sample points `s_grid`.
///
/// (G1) is the finiteness of `g, g′` together with bounded difference
/// quotients of `g′`; (G3) uses the kernel's claimed `ζ`.
pub fn check_assumptions(
    kernel: &MemoryKernel,
    c2: f64,
    s_grid: &[f64],
    tol: f64,
) -> Result<KernelReport> {
    let mut samples = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        samples.push((s, kernel.eval(s)?));
    }
    let zeta = kernel.zeta();
    let mass = kernel.total_mass();

    let mut g1 = 0.0f64;
    let mut g1_at = None;
    for pair in samples.windows(2) {
        let (s0, (_, d0, _)) = pair[0];
        let (s1, (_, d1, _)) = pair[1];
        let q = if s1 > s0 { (d1 - d0) / (s1 - s0) } else { 0.0 };
        if !q.is_finite() {
            g1 = f64::INFINITY;
            g1_at = Some(s0);
        }
    }
    if samples
        .iter()
        .any(|(_, (g, d, _))| !(g.is_finite() && d.is_finite()))
    {
        g1 = f64::INFINITY;
    }

    let (mut g2, mut g2_at) = worst(&samples, |(g, _, _)| -g);
    if mass <= 0.0 {
        g2 = g2.max(-mass).max(f64::MIN_POSITIVE);
        g2_at = None;
    } else if mass >= c2 {
        g2 = g2.max(mass - c2).max(f64::MIN_POSITIVE);
        g2_at = None;
    }
    let (g3, g3_at) = if zeta.is_finite() {
        worst(&samples, |(g, d, _)| d + zeta * g)
    } else {
        (0.0, None)
    };
    let (g4, g4_at) = worst(&samples, |(_, _, dd)| -dd);

    // mass outside (0, c²) fails regardless of tolerance
    let mut g2_check = AssumptionCheck::from_violation(g2, g2_at, tol);
    if !(mass > 0.0 && mass < c2) {
        g2_check.pass = false;
    }

    Ok(KernelReport {
        mass,
        cg2: c2 - mass,
        zeta,
        g1: AssumptionCheck::from_violation(g1, g1_at, 0.0),
        g2: g2_check,
        g3: AssumptionCheck::from_violation(g3, g3_at, tol),
        g4: AssumptionCheck::from_violation(g4, g4_at, tol),
    })
}

fn worst(
    samples: &[(f64, (f64, f64, f64))],
    violation: impl Fn((f64, f64, f64)) -> f64,
) -> (f64, Option<f64>) {
    let mut best = 0.0;
    let mut at = None;
    for &(s, vals) in samples {
        let v = violation(vals);
        if v > best {
            best = v;
            at = Some(s);
        }
    }
    (best, at)
}

/// Monotone cubic Hermite interpolant of sampled kernel values.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedKernel {
    s: Vec<f64>,
    g: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    zeta: f64,
}

impl TabulatedKernel {
    pub fn new(s: Vec<f64>, g: Vec<f64>, zeta: Option<f64>) -> Result<Self> {
        if s.len() != g.len() {
            return Err(Error::InvalidKernel("s and g lengths differ".into()));
        }
        if s.len() < 2 {
            return Err(Error::InvalidKernel("need at least two samples".into()));
        }
        if s[0] != 0.0 {
            return Err(Error::InvalidKernel("first sample must be at s = 0".into()));
        }
        if s.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("non-finite sample".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKernel("s must be strictly increasing".into()));
        }
        if let Some(z) = zeta {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidKernel(format!("decay rate zeta = {z}")));
            }
        }
        let slopes = pchip_slopes(&s, &g);
        let mut cumulative = Vec::with_capacity(s.len());
        cumulative.push(0.0);
        for i in 0..s.len() - 1 {
            let h = s[i + 1] - s[i];
            let cell = h * (0.5 * (g[i] + g[i + 1]) + h * (slopes[i] - slopes[i + 1]) / 12.0);
            cumulative.push(cumulative[i] + cell);
        }
        let fitted = s
            .iter()
            .zip(&g)
            .zip(&slopes)
            .filter(|((_, &gv), _)| gv > 0.0)
            .map(|((_, &gv), &d)| -d / gv)
            .fold(f64::INFINITY, f64::min);
        let zeta = zeta.unwrap_or(if fitted.is_finite() { fitted } else { 0.0 });
        Ok(Self {
            s,
            g,
            slopes,
            cumulative,
            zeta,
        })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.s, &self.g)
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    fn locate(&self, s: f64) -> Option<usize> {
        let last = *self.s.last()?;
        if s > last {
            return None;
        }
        let i = self.s.partition_point(|&x| x <= s);
        Some(i.saturating_sub(1).min(self.s.len() - 2))
    }

    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let Some(i) = self.locate(s) else {
            return (0.0, 0.0, 0.0);
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        let (y0, y1) = (self.g[i], self.g[i + 1]);
        let (m0, m1) = (h * self.slopes[i], h * self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let g = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dg = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let d2g = ((12.0 * t - 6.0) * y0
            + (6.0 * t - 4.0) * m0
            + (-12.0 * t + 6.0) * y1
            + (6.0 * t - 2.0) * m1)
            / (h * h);
        (g, dg, d2g)
    }

    fn integral_to(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        let Some(i) = self.locate(s) else {
            return *self.cumulative.last().unwrap_or(&0.0);
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        let (y0, y1) = (self.g[i], self.g[i + 1]);
        let (m0, m1) = (h * self.slopes[i], h * self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let partial = (0.5 * t4 - t3 + t) * y0
            + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * m0
            + (-0.5 * t4 + t3) * y1
            + (0.25 * t4 - t3 / 3.0) * m1;
        self.cumulative[i] + h * partial
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> MemoryKernel {
        MemoryKernel::exponential(0.2, 1.0, 1.0).unwrap()
    }

    fn grid(s_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| j as f64 * s_max / n as f64).collect()
    }

    #[test]
    fn exponential_values_at_origin() {
        let (g, dg, d2g) = reference().eval(0.0).unwrap();
        assert_relative_eq!(g, 0.2, max_relative = 1e-15);
        assert_relative_eq!(dg, -0.2, max_relative = 1e-15);
        assert_relative_eq!(d2g, 0.2, max_relative = 1e-15);
    }

    #[test]
    fn negative_history_time_is_rejected() {
        assert!(matches!(
            reference().eval(-1e-3),
            Err(Error::NegativeHistoryTime(_))
        ));
        assert!(reference().eval(f64::NAN).is_err());
    }

    #[test]
    fn kernels_vanish_at_large_s() {
        let tab = MemoryKernel::gaussian_counterexample(0.2).unwrap();
        for k in [reference(), tab, MemoryKernel::Memoryless] {
            assert!(k.eval(200.0).unwrap().0.abs() < 1e-40);
        }
    }

    #[test]
    fn exponential_satisfies_g3_with_equality() {
        let k = reference();
        for s in grid(30.0, 300) {
            let (g, dg, _) = k.eval(s).unwrap();
            assert_eq!(dg + k.zeta() * g, 0.0);
        }
    }

    #[test]
    fn reference_mass_and_speed() {
        let k = reference();
        assert_relative_eq!(k.total_mass(), 0.2, max_relative = 1e-15);
        assert_relative_eq!(c_g_squared(&k, 1.0).unwrap(), 0.8, max_relative = 1e-15);

        let k = MemoryKernel::exponential(0.5, 2.0, 0.5).unwrap();
        let quad = trapezoid_mass(&k, 20.0, 200_000).unwrap();
        assert_relative_eq!(quad, 0.5, max_relative = 1e-8);
        assert_relative_eq!(c_g_squared(&k, 2.0).unwrap(), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_mass_matches_closed_form() {
        let k = reference();
        // g(30)/g(0) = e^{-30} < 1e-12
        let quad = trapezoid_mass(&k, 30.0, 100_000).unwrap();
        assert_relative_eq!(quad, 0.2, max_relative = 1e-8);
    }

    #[test]
    fn memoryless_keeps_full_speed() {
        assert_eq!(c_g_squared(&MemoryKernel::Memoryless, 1.3).unwrap(), 1.3);
        let zero = MemoryKernel::exponential(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            c_g_squared(&zero, 1.0),
            Err(Error::InadmissibleKernel { .. })
        ));
        let heavy = MemoryKernel::exponential(1.5, 1.0, 1.0).unwrap();
        assert!(c_g_squared(&heavy, 1.0).is_err());
    }

    #[test]
    fn exponential_report_passes_with_zero_violation() {
        let r = check_assumptions(&reference(), 1.0, &grid(30.0, 256), 1e-12).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.g3.worst, 0.0);
        assert_eq!(r.g4.worst, 0.0);
        assert_relative_eq!(r.cg2, 0.8, max_relative = 1e-15);
    }

    #[test]
    fn overclaimed_zeta_fails_g3() {
        let k = MemoryKernel::exponential_with_zeta(0.2, 1.0, 1.0, 2.0).unwrap();
        let r = check_assumptions(&k, 1.0, &grid(30.0, 256), 1e-12).unwrap();
        assert!(!r.g3.pass);
        // g′ + 2g = g, largest at s = 0
        assert_relative_eq!(r.g3.worst, 0.2, max_relative = 1e-14);
        assert_eq!(r.g3.at, Some(0.0));
    }

    #[test]
    fn tabulated_with_flat_start_fails_g3() {
        let s = grid(40.0, 4000);
        let g = s.iter().map(|&x| (1.0 + x) * (-x).exp()).collect();
        let k = MemoryKernel::tabulated(s.clone(), g, Some(1.0)).unwrap();
        let r = check_assumptions(&k, 1.0, &s, 1e-12).unwrap();
        assert!(!r.g3.pass);
        // g′ + g = e^{-s}: worst at the origin, close to 1
        assert_eq!(r.g3.at, Some(0.0));
        assert!(r.g3.worst > 0.9);
    }

    #[test]
    fn counterexample_breaks_convexity_only() {
        let k = MemoryKernel::gaussian_counterexample(0.2).unwrap();
        let r = check_assumptions(&k, 1.0, &grid(8.0, 800), 1e-12).unwrap();
        assert!(!r.g4.pass);
        assert!(r.g2.pass);
        assert_relative_eq!(r.mass, 0.2 * std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn memoryless_is_flagged_by_g2() {
        let r = check_assumptions(&MemoryKernel::Memoryless, 1.0, &grid(1.0, 4), 1e-12).unwrap();
        assert!(!r.g2.pass);
        assert!(r.g1.pass && r.g3.pass && r.g4.pass);
    }

    #[test]
    fn pchip_reproduces_exponential() {
        let s = grid(30.0, 3000);
        let g: Vec<f64> = s.iter().map(|&x| 0.2 * (-x).exp()).collect();
        let k = MemoryKernel::tabulated(s, g, None).unwrap();
        for x in [0.05, 0.555, 3.21, 17.0] {
            let (g, dg, _) = k.eval(x).unwrap();
            assert_relative_eq!(g, 0.2 * (-x).exp(), max_relative = 1e-6);
            assert_relative_eq!(dg, -0.2 * (-x).exp(), max_relative = 1e-3);
        }
        assert_relative_eq!(k.total_mass(), 0.2, max_relative = 1e-6);
        assert_relative_eq!(k.zeta(), 1.0, max_relative = 1e-2);
        assert_relative_eq!(
            k.integral(1.0, 2.0),
            0.2 * ((-1.0f64).exp() - (-2.0f64).exp()),
            max_relative = 1e-7
        );
    }

    #[test]
    fn pchip_interpolates_samples_and_stays_monotone() {
        let s = vec![0.0, 0.5, 1.0, 3.0, 4.0];
        let g = vec![1.0, 0.9, 0.2, 0.19, 0.0];
        let k = TabulatedKernel::new(s.clone(), g.clone(), Some(0.1)).unwrap();
        for (x, y) in s.iter().zip(&g) {
            assert_relative_eq!(k.eval(*x).0, *y, epsilon = 1e-14);
        }
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let v = k.eval(i as f64 * 0.01).0;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert_eq!(k.eval(4.5).0, 0.0);
    }

    #[test]
    fn tabulated_validation() {
        assert!(MemoryKernel::tabulated(vec![0.0], vec![1.0], None).is_err());
        assert!(MemoryKernel::tabulated(vec![0.1, 1.0], vec![1.0, 0.5], None).is_err());
        assert!(MemoryKernel::tabulated(vec![0.0, 0.0], vec![1.0, 0.5], None).is_err());
        assert!(MemoryKernel::tabulated(vec![0.0, 1.0], vec![1.0, 0.5], Some(-1.0)).is_err());
    }

    #[test]
    fn csv_loading() {
        let text = "# comment\ns,g\n0.0, 1.0\n1.0, 0.5\n2.0, 0.25\n";
        let k = MemoryKernel::from_csv_reader(text.as_bytes(), None).unwrap();
        let MemoryKernel::Tabulated(t) = &k else {
            panic!("expected tabulated kernel");
        };
        assert_eq!(t.samples().0, &[0.0, 1.0, 2.0]);
        assert!(MemoryKernel::from_csv_reader("0,1\n1,x\n".as_bytes(), None).is_err());
        assert!(MemoryKernel::from_csv_reader("0,1,2\n".as_bytes(), None).is_err());
    }

    proptest! {
        #[test]
        fn exponential_g3_threshold(tau_r in 0.2f64..5.0, frac in 0.01f64..3.0) {
            let zeta = frac / tau_r;
            let k = MemoryKernel::exponential_with_zeta(0.1, 1.0, tau_r, zeta).unwrap();
            let r = check_assumptions(&k, 1.0, &grid(30.0 * tau_r, 200), 1e-12).unwrap();
            if frac <= 1.0 {
                prop_assert!(r.g3.pass);
            } else if frac > 1.0 + 1e-9 {
                prop_assert!(!r.g3.pass);
            }
        }

        #[test]
        fn exponential_mass_closed_form(m in 0.01f64..0.5, c2 in 0.5f64..3.0, tau_r in 0.2f64..2.0) {
            let k = MemoryKernel::exponential(m, c2, tau_r).unwrap();
            let mass = k.total_mass();
            prop_assert!((mass - m * c2 * tau_r).abs() <= 1e-14 * mass);
            prop_assert!((k.integral(0.0, 60.0 * tau_r) - mass).abs() <= 1e-12 * mass);
        }
    }
}
