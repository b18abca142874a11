//! Torus grids, sampled fields and the spectral transform they share.
//!
//! Samples are stored row-major with axis 0 slowest. Every derivative goes
//! through [`Spectrum::differentiate`], so the physical-space and
//! spectral-space routes are literally the same code.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

/// Uniform periodic grid on the torus `[0, L)^dim` with `N` points per axis.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    h: f64,
    /// Angular wavenumbers in FFT order, identical for every axis.
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("dim", &self.dim()).field("n", &self.n()).field("length", &self.length()).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || (self.dim() == other.dim() && self.n() == other.n() && self.length() == other.length())
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidGrid(format!("dim {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!("N = {n} must be a power of two >= 8")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(LabError::InvalidGrid(format!("box length {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let wavenumbers = (0..n).map(|j| 2.0 * std::f64::consts::PI * mode_number(j, n) as f64 / length).collect();
        Ok(Grid { inner: Arc::new(GridInner { dim, n, length, h: length / n as f64, wavenumbers, fft, ifft }) })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.h
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.inner.n.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.inner.h.powi(self.inner.dim as i32)
    }

    /// Angular wavenumbers per axis, FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Multi-index of a flat index (unused trailing axes are zero).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.n();
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim()).rev() {
            idx[axis] = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let n = self.n();
        idx.iter().take(self.dim()).fold(0, |acc, &i| acc * n + (i % n))
    }

    /// Physical coordinates `x_j = j h` of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Wavevector of a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let k = self.wavenumbers();
        let mut out = [0.0; 3];
        for axis in 0..self.dim() {
            out[axis] = k[idx[axis]];
        }
        out
    }

    pub fn xi_squared(&self, flat: usize) -> f64 {
        let xi = self.wavevector(flat);
        xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    }

    /// Largest `|ξ|²` on the grid.
    pub fn xi_squared_max(&self) -> f64 {
        let kmax = std::f64::consts::PI / self.spacing();
        self.dim() as f64 * kmax * kmax
    }

    /// Multiplier of `∂^order/∂x_axis^order` at a spectral index. The Nyquist
    /// mode is zeroed for odd orders so real fields stay real.
    pub fn derivative_multiplier(&self, axis: usize, order: u32, flat: usize) -> Complex64 {
        let j = self.multi_index(flat)[axis];
        if order % 2 == 1 && j == self.n() / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let ik = Complex64::new(0.0, self.wavenumbers()[j]);
        ik.powu(order)
    }

    /// Unnormalized forward DFT over every axis, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.fft);
    }

    /// Inverse DFT normalized by `1/N^dim`, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.ifft);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        let n = self.n();
        let dim = self.dim();
        let total = data.len();
        // Last axis is contiguous.
        plan.process(data);
        if dim == 1 {
            return;
        }
        let mut lines = vec![Complex64::new(0.0, 0.0); total];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            // Gather every line along `axis` into contiguous storage.
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    let dst = &mut lines[line * n..(line + 1) * n];
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d = data[start + j * stride];
                    }
                    line += 1;
                }
            }
            plan.process(&mut lines);
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    let src = &lines[line * n..(line + 1) * n];
                    for (j, s) in src.iter().enumerate() {
                        data[start + j * stride] = *s;
                    }
                    line += 1;
                }
            }
        }
    }

    /// Samples a closure of the physical coordinates.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, f: F) -> ScalarField {
        let values = (0..self.len()).map(|i| f(self.coords(i))).collect();
        ScalarField::new(self.clone(), values).expect("length matches by construction")
    }

    pub fn sample_complex<F: Fn([f64; 3]) -> Complex64>(&self, f: F) -> ComplexField {
        let values = (0..self.len()).map(|i| f(self.coords(i))).collect();
        ComplexField::new(self.clone(), values).expect("length matches by construction")
    }

    /// Wrapped distance along one axis between two indices, in index units.
    pub fn wrapped_offset(&self, a: usize, b: usize) -> usize {
        let n = self.n();
        let d = a.abs_diff(b);
        d.min(n - d)
    }
}

/// Signed mode number of FFT slot `j` in `[-N/2, N/2)`.
pub fn mode_number(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Spectral coefficients of a field (unnormalized DFT).
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_complex(values: &[Complex64], grid: &Grid) -> Spectrum {
        let mut coeffs = values.to_vec();
        grid.forward(&mut coeffs);
        Spectrum { grid: grid.clone(), coeffs }
    }

    pub fn from_real(values: &[f64], grid: &Grid) -> Spectrum {
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward(&mut coeffs);
        Spectrum { grid: grid.clone(), coeffs }
    }

    pub fn zeros(grid: &Grid) -> Spectrum {
        Spectrum { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiplies every coefficient by `m(flat_index)`.
    pub fn apply<M: Fn(usize) -> Complex64>(mut self, m: M) -> Spectrum {
        for (j, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(j);
        }
        self
    }

    pub fn differentiate(self, axis: usize, order: u32) -> Spectrum {
        let grid = self.grid.clone();
        self.apply(|j| grid.derivative_multiplier(axis, order, j))
    }

    pub fn laplacian(self) -> Spectrum {
        let grid = self.grid.clone();
        self.apply(|j| Complex64::new(-grid.xi_squared(j), 0.0))
    }

    /// `(-Δ)^{-1}` with the mean mode set to zero.
    pub fn inverse_neg_laplacian(self) -> Spectrum {
        let grid = self.grid.clone();
        self.apply(|j| {
            let k2 = grid.xi_squared(j);
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / k2, 0.0)
            }
        })
    }

    pub fn add_assign(&mut self, other: &Spectrum) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
    }

    pub fn into_complex(self) -> ComplexField {
        let mut values = self.coeffs;
        self.grid.inverse(&mut values);
        ComplexField { grid: self.grid, values }
    }

    pub fn into_real(self) -> ScalarField {
        let mut values = self.coeffs;
        self.grid.inverse(&mut values);
        ScalarField { grid: self.grid, values: values.iter().map(|c| c.re).collect() }
    }
}

/// Fields that round-trip through [`Spectrum`].
pub trait SpectralField: Sized + Clone {
    fn grid(&self) -> &Grid;
    fn spectrum(&self) -> Spectrum;
    fn from_spectrum(s: Spectrum) -> Self;
}

/// Real scalar samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidArgument(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> ScalarField {
        ScalarField { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &Grid, c: f64) -> ScalarField {
        ScalarField { grid: grid.clone(), values: vec![c; grid.len()] }
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

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> ScalarField {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { grid: self.grid.clone(), values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField { grid: self.grid.clone(), values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }
}

impl SpectralField for ScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn spectrum(&self) -> Spectrum {
        Spectrum::from_real(&self.values, &self.grid)
    }

    fn from_spectrum(s: Spectrum) -> Self {
        s.into_real()
    }
}

/// Complex scalar samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<ComplexField> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidArgument(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> ComplexField {
        ComplexField { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn re(&self) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|c| c.re).collect() }
    }

    pub fn im(&self) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|c| c.im).collect() }
    }

    pub fn scale(&self, s: Complex64) -> ComplexField {
        ComplexField { grid: self.grid.clone(), values: self.values.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &ComplexField) -> ComplexField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        ComplexField { grid: self.grid.clone(), values }
    }

    pub fn sub(&self, other: &ComplexField) -> ComplexField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        ComplexField { grid: self.grid.clone(), values }
    }

    pub fn abs(&self) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|c| c.norm()).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

impl SpectralField for ComplexField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn spectrum(&self) -> Spectrum {
        Spectrum::from_complex(&self.values, &self.grid)
    }

    fn from_spectrum(s: Spectrum) -> Self {
        s.into_complex()
    }
}

/// Exact spectral derivative of order 1 or 2 along `axis`.
pub fn derivative<F: SpectralField>(f: &F, axis: usize, order: u32) -> Result<F> {
    if axis >= f.grid().dim() {
        return Err(LabError::InvalidArgument(format!("axis {axis} out of range for dim {}", f.grid().dim())));
    }
    if !(1..=2).contains(&order) {
        return Err(LabError::InvalidArgument(format!("derivative order {order} not in 1..=2")));
    }
    Ok(F::from_spectrum(f.spectrum().differentiate(axis, order)))
}

pub fn laplacian<F: SpectralField>(f: &F) -> F {
    F::from_spectrum(f.spectrum().laplacian())
}

pub fn gradient<F: SpectralField>(f: &F) -> Vec<F> {
    let spec = f.spectrum();
    (0..f.grid().dim()).map(|axis| F::from_spectrum(spec.clone().differentiate(axis, 1))).collect()
}

pub fn divergence<F: SpectralField>(v: &[F]) -> Result<F> {
    let first = v.first().ok_or_else(|| LabError::InvalidArgument("empty vector".into()))?;
    let grid = first.grid().clone();
    if v.len() != grid.dim() {
        return Err(LabError::InvalidArgument(format!("divergence needs {} components, got {}", grid.dim(), v.len())));
    }
    let mut acc = Spectrum::zeros(&grid);
    for (axis, comp) in v.iter().enumerate() {
        if *comp.grid() != grid {
            return Err(LabError::GridMismatch);
        }
        acc.add_assign(&comp.spectrum().differentiate(axis, 1));
    }
    Ok(F::from_spectrum(acc))
}

/// `(-Δ)^{-1} div v` with the mean mode removed; the building block of every
/// gauge-field solve.
pub fn inverse_laplacian_of_divergence(v: &[ScalarField]) -> Result<ScalarField> {
    let first = v.first().ok_or_else(|| LabError::InvalidArgument("empty vector".into()))?;
    let grid = first.grid().clone();
    let mut acc = Spectrum::zeros(&grid);
    for (axis, comp) in v.iter().enumerate() {
        acc.add_assign(&comp.spectrum().differentiate(axis, 1));
    }
    Ok(acc.inverse_neg_laplacian().into_real())
}

/// Applies a real-preserving multiplier to two real fields with one complex
/// transform pair (packs `a + i b`).
pub fn filter_real_pair<M: Fn(usize) -> f64>(grid: &Grid, a: &[f64], b: &[f64], m: M) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    grid.forward(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= m(j);
    }
    grid.inverse(&mut buf);
    (buf.iter().map(|c| c.re).collect(), buf.iter().map(|c| c.im).collect())
}

/// Three real components per grid point, stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn new(grid: Grid, comps: [Vec<f64>; 3]) -> Result<VectorField> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(LabError::InvalidArgument("component length mismatch".into()));
        }
        Ok(VectorField { grid, comps })
    }

    pub fn zeros(grid: &Grid) -> VectorField {
        let z = vec![0.0; grid.len()];
        VectorField { grid: grid.clone(), comps: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn<F: Fn(usize) -> [f64; 3]>(grid: &Grid, f: F) -> VectorField {
        let mut out = VectorField::zeros(grid);
        for i in 0..grid.len() {
            out.set(i, f(i));
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize) -> [f64; 3] {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: [f64; 3]) {
        self.comps[0][i] = v[0];
        self.comps[1][i] = v[1];
        self.comps[2][i] = v[2];
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.comps[c].clone() }
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axpy(&self, a: f64, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for c in 0..3 {
            for (o, x) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *o += a * x;
            }
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).fold(0.0_f64, |m, i| m.max(norm3(self.get(i))))
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Laplacian of every component.
    pub fn laplacian(&self) -> VectorField {
        let g = self.grid.clone();
        let (l0, l1) = filter_real_pair(&g, &self.comps[0], &self.comps[1], |j| -g.xi_squared(j));
        let l2 = laplacian(&self.component_field(2)).into_values();
        VectorField { grid: g, comps: [l0, l1, l2] }
    }

    /// `∂_axis` of every component.
    pub fn partial(&self, axis: usize) -> VectorField {
        let g = self.grid.clone();
        let m = |j: usize| g.derivative_multiplier(axis, 1, j);
        let pair = |a: &[f64], b: &[f64]| {
            let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
            g.forward(&mut buf);
            for (j, c) in buf.iter_mut().enumerate() {
                *c *= m(j);
            }
            g.inverse(&mut buf);
            buf
        };
        let b01 = pair(&self.comps[0], &self.comps[1]);
        let zeros = vec![0.0; self.len()];
        let b2 = pair(&self.comps[2], &zeros);
        VectorField { grid: g.clone(), comps: [b01.iter().map(|c| c.re).collect(), b01.iter().map(|c| c.im).collect(), b2.iter().map(|c| c.re).collect()] }
    }

    /// All first partials, one `VectorField` per axis.
    pub fn gradient(&self) -> Vec<VectorField> {
        (0..self.grid.dim()).map(|a| self.partial(a)).collect()
    }
}

/// A sphere-valued field: `|m(x)| = 1` at every sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinField {
    inner: VectorField,
}

impl SpinField {
    /// Normalizes every sample onto the unit sphere.
    pub fn from_vectors(v: VectorField) -> Result<SpinField> {
        let mut inner = v;
        for i in 0..inner.len() {
            let x = inner.get(i);
            let r = norm3(x);
            if !(r > 0.0) || !r.is_finite() {
                return Err(LabError::InvalidArgument(format!("cannot normalize sample {i}: {x:?}")));
            }
            inner.set(i, [x[0] / r, x[1] / r, x[2] / r]);
        }
        Ok(SpinField { inner })
    }

    pub fn constant(grid: &Grid, m: [f64; 3]) -> Result<SpinField> {
        SpinField::from_vectors(VectorField::from_fn(grid, |_| m))
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: &Grid, f: F) -> Result<SpinField> {
        SpinField::from_vectors(VectorField::from_fn(grid, |i| f(grid.coords(i))))
    }

    pub fn grid(&self) -> &Grid {
        self.inner.grid()
    }

    pub fn get(&self, i: usize) -> [f64; 3] {
        self.inner.get(i)
    }

    pub fn as_vector(&self) -> &VectorField {
        &self.inner
    }

    pub fn into_vector(self) -> VectorField {
        self.inner
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest deviation of `|m|` from one.
    pub fn unit_defect(&self) -> f64 {
        (0..self.len()).fold(0.0_f64, |m, i| m.max((norm3(self.get(i)) - 1.0).abs()))
    }
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        assert!((g.spacing() - PI / 8.0).abs() < 1e-15);
        let modes: Vec<i64> = (0..16).map(|j| mode_number(j, 16)).collect();
        let mut sorted = modes.clone();
        sorted.sort();
        assert_eq!(sorted, (-8..8).collect::<Vec<_>>());
        for (j, k) in g.wavenumbers().iter().enumerate() {
            assert!((k - modes[j] as f64).abs() < 1e-14);
        }

        let g = Grid::new(2, 32, 1.0).unwrap();
        assert_eq!(g.len(), 1024);
        let kmin = g.wavenumbers().iter().cloned().fold(f64::INFINITY, f64::min);
        let kmax = g.wavenumbers().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((kmin + 32.0 * PI).abs() < 1e-12);
        assert!((kmax - 30.0 * PI).abs() < 1e-12);

        assert!(Grid::new(3, 8, 2.0 * PI).is_ok());
        assert!(Grid::new(3, 7, 2.0 * PI).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 8, -1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = g.sample(|x| x[0].sin());
        let df = derivative(&f, 0, 1).unwrap();
        let expect = g.sample(|x| x[0].cos());
        assert!(max_diff(df.values(), expect.values()) < 1e-12);

        let c = ScalarField::constant(&g, 3.5);
        for order in 1..=2 {
            assert!(derivative(&c, 0, order).unwrap().sup_norm() < 1e-12);
        }

        let e = g.sample_complex(|x| Complex64::new(0.0, 2.0 * x[0]).exp());
        let d2 = derivative(&e, 0, 2).unwrap();
        let err = d2.values().iter().zip(e.values()).fold(0.0_f64, |m, (a, b)| m.max((a + 4.0 * b).norm()));
        assert!(err < 1e-12);

        assert!(derivative(&f, 1, 1).is_err());
        assert!(derivative(&f, 0, 3).is_err());
    }

    #[test]
    fn nyquist_zeroed_for_odd_order() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        // cos(4x) lives entirely in the Nyquist mode.
        let f = g.sample(|x| (4.0 * x[0]).cos());
        assert!(derivative(&f, 0, 1).unwrap().sup_norm() < 1e-14);
        let d2 = derivative(&f, 0, 2).unwrap();
        assert!(max_diff(d2.values(), f.map(|v| -16.0 * v).values()) < 1e-12);
    }

    #[test]
    fn laplacian_and_gradient_examples() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = g.sample(|x| x[0].sin() + x[1].cos());
        let l = laplacian(&f);
        assert!(max_diff(l.values(), f.map(|v| -v).values()) < 1e-12);
        for comp in gradient(&ScalarField::constant(&g, 2.0)) {
            assert!(comp.sup_norm() < 1e-12);
        }
        let v = VectorField::from_fn(&g, |i| {
            let x = g.coords(i);
            [x[0].sin(), x[1].cos(), (x[0] + x[1]).sin()]
        });
        let lv = v.laplacian();
        let expect = [g.sample(|x| -x[0].sin()), g.sample(|x| -x[1].cos()), g.sample(|x| -2.0 * (x[0] + x[1]).sin())];
        for c in 0..3 {
            assert!(max_diff(lv.component(c), expect[c].values()) < 1e-12);
        }
        let dx = v.partial(0);
        assert!(max_diff(dx.component(0), g.sample(|x| x[0].cos()).values()) < 1e-12);
        assert!(dx.component(1).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn three_dimensional_transform_round_trip() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let f = g.sample(|x| (x[0] + 2.0 * x[1] - x[2]).sin() + x[2].cos());
        let dz = derivative(&f, 2, 1).unwrap();
        let expect = g.sample(|x| -(x[0] + 2.0 * x[1] - x[2]).cos() - x[2].sin());
        assert!(max_diff(dz.values(), expect.values()) < 1e-12);
    }
}
