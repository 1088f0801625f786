//! Periodic-box grid functions and Fourier-multiplier calculus.
//!
//! Fields are real samples on a uniform grid over `[0, L)^n`, stored
//! row-major with the last axis fastest. Spectra are the unnormalised
//! forward DFT, so Plancherel reads
//! `‖f‖²_{L²} = (|Ω| / N_tot²) Σ_k |f̂_k|²`.
//!
//! Derivative multipliers use the wavenumbers `ξ = 2πk/L`,
//! `k ∈ {−N/2, …, N/2−1}`, with the unpaired Nyquist mode `k = −N/2`
//! assigned zero frequency in every operator. That keeps gradients of real
//! fields real and makes `Δ = ∇·∇`, `‖∇^κ f‖` and the Hessian identities
//! hold exactly on the discrete level.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid with cached FFT plans and wavenumber tables.
pub struct Grid {
    dim: usize,
    n: usize,
    lengths: [f64; 3],
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    axis_xi: Vec<Vec<f64>>,
    axis_k: Vec<Vec<i64>>,
    xi2: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("lengths", &&self.lengths[..self.dim])
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.lengths == other.lengths
    }
}

impl Grid {
    /// Builds a grid with `n` points on each of `dim` axes; `lengths` holds
    /// one box length per axis (a single entry is broadcast).
    pub fn new(dim: usize, n: usize, lengths: &[f64]) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        let mut box_lengths = [1.0; 3];
        match lengths.len() {
            1 => box_lengths[..dim].fill(lengths[0]),
            l if l == dim => box_lengths[..dim].copy_from_slice(lengths),
            l => {
                return Err(Error::InvalidGrid(format!(
                    "expected 1 or {dim} box lengths, got {l}"
                )))
            }
        }
        if box_lengths[..dim].iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid("box lengths must be positive".into()));
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let backward = planner.plan_fft_inverse(n);

        let total = n.pow(dim as u32);
        let mut axis_xi = Vec::with_capacity(dim);
        let mut axis_k = Vec::with_capacity(dim);
        for (axis, length) in box_lengths[..dim].iter().enumerate() {
            let stride = n.pow((dim - 1 - axis) as u32);
            let scale = 2.0 * PI / length;
            let mut xi = Vec::with_capacity(total);
            let mut ks = Vec::with_capacity(total);
            for idx in 0..total {
                let i = (idx / stride) % n;
                let k = signed_index(i, n);
                ks.push(k);
                xi.push(if i == n / 2 { 0.0 } else { scale * k as f64 });
            }
            axis_xi.push(xi);
            axis_k.push(ks);
        }
        let xi2 = (0..total)
            .map(|idx| axis_xi.iter().map(|xi| xi[idx] * xi[idx]).sum())
            .collect();

        Ok(Arc::new(Self {
            dim,
            n,
            lengths: box_lengths,
            forward,
            backward,
            axis_xi,
            axis_k,
            xi2,
        }))
    }

    /// Grid with the same length on every axis.
    pub fn cube(dim: usize, n: usize, length: f64) -> Result<Arc<Self>> {
        Self::new(dim, n, &[length])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn box_length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn box_lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi2.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n as f64
    }

    /// Physical wavenumber `2πk/L` of index `i` along `axis`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * signed_index(i, self.n) as f64 / self.lengths[axis]
    }

    /// Wavenumber used by derivative multipliers at flat spectral index `idx`.
    pub fn xi(&self, axis: usize, idx: usize) -> f64 {
        self.axis_xi[axis][idx]
    }

    /// `|ξ|²` at flat spectral index `idx`.
    pub fn xi2(&self, idx: usize) -> f64 {
        self.xi2[idx]
    }

    pub fn xi2_table(&self) -> &[f64] {
        &self.xi2
    }

    /// Integer mode number along `axis` at flat spectral index `idx`.
    pub fn mode(&self, axis: usize, idx: usize) -> i64 {
        self.axis_k[axis][idx]
    }

    /// Physical coordinates of node `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            x[axis] = (rem % self.n) as f64 * self.spacing(axis);
            rem /= self.n;
        }
        x
    }

    /// Scale turning `Σ_k â_k conj(b̂_k)` into the continuous `L²` pairing.
    pub fn plancherel_scale(&self) -> f64 {
        let total = self.len() as f64;
        self.volume() / (total * total)
    }

    /// Mask implementing the 2/3 truncation rule.
    pub fn keeps_mode_dealiased(&self, idx: usize) -> bool {
        let cutoff = (self.n / 3) as i64;
        self.axis_k.iter().all(|k| k[idx].abs() <= cutoff)
    }

    fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.backward } else { &self.forward };
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let total = data.len();
        let mut line = vec![Complex64::default(); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Transform direction for [`transform`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Either representation of a grid function.
#[derive(Clone, Debug)]
pub enum Representation {
    Physical(Field),
    Spectral(Spectrum),
}

/// Moves a grid function between physical and spectral space.
pub fn transform(input: &Representation, direction: Direction) -> Result<Representation> {
    match (input, direction) {
        (Representation::Physical(f), Direction::Forward) => {
            Ok(Representation::Spectral(f.forward()?))
        }
        (Representation::Spectral(s), Direction::Inverse) => {
            Ok(Representation::Physical(s.inverse()))
        }
        _ => Err(Error::InvalidArgument(
            "transform direction does not match the representation".into(),
        )),
    }
}

/// Real scalar samples on a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Self {
            grid: Arc::clone(grid),
            values,
        };
        field.ensure_finite("field")?;
        Ok(field)
    }

    /// Like [`Field::from_values`] without the finiteness check.
    pub(crate) fn from_values_unchecked(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|idx| f(&grid.coords(idx)[..dim]))
            .collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn forward(&self) -> Result<Spectrum> {
        self.ensure_finite("transform input")?;
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fft_in_place(&mut coeffs, false);
        Ok(Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs,
        })
    }

    /// Gradient by the multipliers `iξ_j`; one field per axis.
    pub fn gradient(&self) -> Result<Vec<Field>> {
        let spec = self.forward()?;
        Ok((0..self.grid.dim())
            .map(|axis| spec.derivative(axis).inverse())
            .collect())
    }

    pub fn laplacian(&self) -> Result<Field> {
        Ok(self.forward()?.laplacian().inverse())
    }

    /// `‖∇^κ f‖_{L²}` defined through the `|ξ|^κ` multiplier.
    pub fn homogeneous_norm(&self, kappa: u32) -> Result<f64> {
        Ok(self.forward()?.homogeneous_norm_sq(kappa).sqrt())
    }

    /// Inhomogeneous Sobolev norm with multiplier `(1+|ξ|²)^{s/2}`; `s` may be
    /// negative or fractional.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        Ok(self.forward()?.sobolev_norm_sq(s).sqrt())
    }

    /// Physical-space partial derivatives of order 1 (gradient) or 2 (Hessian).
    pub fn partials_tensor(&self, kappa: usize) -> Result<Tensor> {
        let dim = self.grid.dim();
        let spec = self.forward()?;
        let components = match kappa {
            1 => (0..dim).map(|i| spec.derivative(i).inverse()).collect(),
            2 => {
                let mut comps = Vec::with_capacity(dim * dim);
                for i in 0..dim {
                    for j in 0..dim {
                        comps.push(spec.second_derivative(i, j).inverse());
                    }
                }
                comps
            }
            order => {
                return Err(Error::InvalidOrder {
                    order,
                    allowed: "1 or 2",
                })
            }
        };
        Ok(Tensor {
            order: kappa,
            dim,
            components,
        })
    }

    /// Quadrature `L²` inner product.
    pub fn l2_inner(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|a| a * a).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Field) {
        debug_assert!(self.same_grid(other));
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.values {
            *x *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Field {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `a * self + b * other`
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Field {
        debug_assert!(self.same_grid(other));
        Field {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Field {
        debug_assert!(self.same_grid(other));
        Field {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x * y)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Unnormalised DFT coefficients of a real field.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse transform; the imaginary part (round-off only for Hermitian
    /// input) is discarded.
    pub fn inverse(&self) -> Field {
        let mut data = self.coeffs.clone();
        self.grid.fft_in_place(&mut data, true);
        let norm = 1.0 / self.grid.len() as f64;
        Field {
            grid: Arc::clone(&self.grid),
            values: data.iter().map(|c| c.re * norm).collect(),
        }
    }

    pub fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Spectrum {
        Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(idx, &c)| f(idx, c))
                .collect(),
        }
    }

    pub fn derivative(&self, axis: usize) -> Spectrum {
        let grid = &self.grid;
        self.map_indexed(|idx, c| c * Complex64::new(0.0, grid.xi(axis, idx)))
    }

    pub fn second_derivative(&self, i: usize, j: usize) -> Spectrum {
        let grid = &self.grid;
        self.map_indexed(|idx, c| c * (-grid.xi(i, idx) * grid.xi(j, idx)))
    }

    pub fn laplacian(&self) -> Spectrum {
        let grid = &self.grid;
        self.map_indexed(|idx, c| c * (-grid.xi2(idx)))
    }

    pub fn dealiased(&self) -> Spectrum {
        let grid = &self.grid;
        self.map_indexed(|idx, c| {
            if grid.keeps_mode_dealiased(idx) {
                c
            } else {
                Complex64::default()
            }
        })
    }

    /// `Σ |ξ|^{2κ} Re(â conj b̂)` scaled to the continuous pairing
    /// `(∇^κ a, ∇^κ b)_{L²}`.
    pub fn weighted_inner(&self, other: &Spectrum, kappa: u32) -> f64 {
        debug_assert!(*self.grid == *other.grid);
        let xi2 = self.grid.xi2_table();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(xi2)
            .map(|((a, b), &k2)| k2.powi(kappa as i32) * (a.re * b.re + a.im * b.im))
            .sum();
        sum * self.grid.plancherel_scale()
    }

    pub fn homogeneous_norm_sq(&self, kappa: u32) -> f64 {
        self.weighted_inner(self, kappa)
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let xi2 = self.grid.xi2_table();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(xi2)
            .map(|(a, &k2)| (1.0 + k2).powf(s) * a.norm_sqr())
            .sum();
        sum * self.grid.plancherel_scale()
    }

    pub fn axpy(&mut self, a: f64, other: &Spectrum) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }
}

/// Tensor of physical-space partials; components are stored row-major
/// (`∂_i` for order 1, `∂_i∂_j` at `i * dim + j` for order 2).
#[derive(Clone, Debug)]
pub struct Tensor {
    order: usize,
    dim: usize,
    components: Vec<Field>,
}

impl Tensor {
    pub fn new(order: usize, dim: usize, components: Vec<Field>) -> Result<Self> {
        if components.len() != dim.pow(order as u32) {
            return Err(Error::InvalidArgument(format!(
                "order-{order} tensor in {dim}D needs {} components",
                dim.pow(order as u32)
            )));
        }
        Ok(Self {
            order,
            dim,
            components,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn component(&self, index: &[usize]) -> &Field {
        let flat = index.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.components[flat]
    }

    /// Frobenius-`L²` norm `(Σ_α ‖T_α‖²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn into_components(self) -> Vec<Field> {
        self.components
    }
}
