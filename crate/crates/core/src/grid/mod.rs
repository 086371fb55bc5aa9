//! Uniform Cartesian space and space-time grids with the fields sampled on them.
//!
//! Values are stored row-major with the last axis varying fastest. On a
//! space-time grid axis 0 is the time coordinate `x0 = c t`, so every axis
//! carries length units and time slices are contiguous blocks.

mod container;
pub(crate) mod stencil;

pub use container::{read_field, write_field, ContainerFormat, FieldContainer};
pub use stencil::Differentiable;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Largest supported number of grid axes (three spatial plus time).
pub const MAX_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<usize>,
    /// Axis 0 is `x0 = c t` when set.
    time_axis: bool,
}

impl Grid {
    /// Spatial grid over the box `[lower, upper]`.
    pub fn new(lower: &[f64], upper: &[f64], points: &[usize]) -> Result<Self> {
        Self::build(lower.to_vec(), upper.to_vec(), points.to_vec(), false)
    }

    /// Unit box `[0,1]^dim` with `n` points per axis.
    pub fn unit_cube(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![0.0; dim], &vec![1.0; dim], &vec![n; dim])
    }

    /// Box `[0,L1] x ... x [0,Ld]` with `n` points per axis.
    pub fn boxed(lengths: &[f64], n: usize) -> Result<Self> {
        Self::new(&vec![0.0; lengths.len()], lengths, &vec![n; lengths.len()])
    }

    /// Prepends a time axis `x0 = c t` in `[x0_lower, x0_upper]` to a spatial grid.
    pub fn space_time(x0_lower: f64, x0_upper: f64, nt: usize, spatial: &Grid) -> Result<Self> {
        if spatial.time_axis {
            return Err(Error::arg("spatial grid already has a time axis"));
        }
        let mut lower = vec![x0_lower];
        let mut upper = vec![x0_upper];
        let mut points = vec![nt];
        lower.extend_from_slice(&spatial.lower);
        upper.extend_from_slice(&spatial.upper);
        points.extend_from_slice(&spatial.points);
        Self::build(lower, upper, points, true)
    }

    /// Space-time grid for `t` in `[0, duration]` seconds, stored as `x0 = c t`.
    pub fn with_duration(duration: f64, nt: usize, c: f64, spatial: &Grid) -> Result<Self> {
        Self::space_time(0.0, c * duration, nt, spatial)
    }

    fn build(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>, time_axis: bool) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::arg(format!("grid dimension {dim} outside 1..={MAX_DIM}")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::arg("bounds and point counts disagree in length"));
        }
        for a in 0..dim {
            if points[a] < 3 {
                return Err(Error::arg(format!("axis {a} has {} points, need >= 3", points[a])));
            }
            if !(lower[a].is_finite() && upper[a].is_finite()) || upper[a] <= lower[a] {
                return Err(Error::arg(format!(
                    "axis {a} bounds [{}, {}] do not give positive spacing",
                    lower[a], upper[a]
                )));
            }
        }
        if time_axis && dim < 2 {
            return Err(Error::arg("space-time grid needs at least one spatial axis"));
        }
        Ok(Grid {
            lower,
            upper,
            points,
            time_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn has_time_axis(&self) -> bool {
        self.time_axis
    }

    /// Axes that are spatial (all of them unless axis 0 is time).
    pub fn spatial_axes(&self) -> std::ops::Range<usize> {
        if self.time_axis {
            1..self.dim()
        } else {
            0..self.dim()
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.points[axis] - 1) as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of time samples (1 for a purely spatial grid).
    pub fn time_samples(&self) -> usize {
        if self.time_axis {
            self.points[0]
        } else {
            1
        }
    }

    /// Points per time slice.
    pub fn slice_len(&self) -> usize {
        self.len() / self.time_samples()
    }

    /// The spatial part of a space-time grid (a clone for spatial grids).
    pub fn spatial(&self) -> Grid {
        if !self.time_axis {
            return self.clone();
        }
        Grid {
            lower: self.lower[1..].to_vec(),
            upper: self.upper[1..].to_vec(),
            points: self.points[1..].to_vec(),
            time_axis: false,
        }
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.points[axis + 1..].iter().product()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.points)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Multi-index of a flat point index; entries past `dim()` are zero.
    pub fn multi_index(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.points[a];
            flat /= self.points[a];
        }
        idx
    }

    pub(crate) fn point_label(&self, flat: usize) -> Vec<usize> {
        self.multi_index(flat)[..self.dim()].to_vec()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.points[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Coordinates of a flat point index; entries past `dim()` are zero.
    pub fn coords(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            x[a] = self.coord(a, idx[a]);
        }
        x
    }

    /// Box volume over all axes (in the grid's own units).
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.upper[a] - self.lower[a]).product()
    }

    fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let h = self.spacing(axis);
        if i == 0 || i + 1 == self.points[axis] {
            0.5 * h
        } else {
            h
        }
    }

    /// Tensor-product trapezoid weight of a point over all axes.
    pub fn trapezoid_weight(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        (0..self.dim()).map(|a| self.axis_weight(a, idx[a])).product()
    }

    /// Trapezoid weight over the spatial axes only.
    pub fn spatial_weight(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        self.spatial_axes()
            .map(|a| self.axis_weight(a, idx[a]))
            .product()
    }

    /// Trapezoid weights along the time axis, in units of `x0`.
    pub fn time_weights(&self) -> Vec<f64> {
        if self.time_axis {
            (0..self.points[0]).map(|i| self.axis_weight(0, i)).collect()
        } else {
            vec![1.0]
        }
    }

    /// Deterministic trapezoid quadrature of `f(point)` over every axis.
    pub fn quadrature<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        exec::sum(self.len(), |p| self.trapezoid_weight(p) * f(p))
    }

    /// Spatial trapezoid quadrature of `f(point)`, one value per time sample.
    pub fn slice_quadrature<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let slice = self.slice_len();
        (0..self.time_samples())
            .map(|t| {
                let off = t * slice;
                exec::sum(slice, |q| {
                    let p = off + q;
                    self.spatial_weight(p) * f(p)
                })
            })
            .collect()
    }

    /// True on points lying on the boundary of a spatial axis.
    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        self.spatial_axes()
            .any(|a| idx[a] == 0 || idx[a] + 1 == self.points[a])
    }

    /// True when the point is interior along every axis, time included.
    pub fn is_interior_all(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim()).all(|a| idx[a] > 0 && idx[a] + 1 < self.points[a])
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Boundary indicator of the spatial axes: `true` exactly on `∂Ω`.
pub fn dirichlet_mask(grid: &Grid) -> Vec<bool> {
    exec::map_collect(grid.len(), |p| grid.is_boundary(p))
}

/// Complex samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(coords)` at every point; `coords` has `grid.dim()` entries.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        let d = grid.dim();
        let values = exec::map_collect(grid.len(), |p| f(&grid.coords(p)[..d]));
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let values = exec::map_collect(self.values.len(), |p| f(self.values[p]));
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&self, s: Complex64) -> ScalarField {
        self.map(|z| z * s)
    }

    /// Pointwise linear combination `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &ScalarField, b: Complex64) -> Result<ScalarField> {
        self.grid.check_same(&other.grid)?;
        let values = exec::map_collect(self.values.len(), |p| a * self.values[p] + b * other.values[p]);
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Trapezoid `∫ |φ|² dx` over every axis.
    pub fn norm_sq(&self) -> f64 {
        self.grid.quadrature(|p| self.values[p].norm_sqr())
    }

    /// Copy rescaled to unit discrete `L²` norm.
    pub fn normalized(&self) -> Result<ScalarField> {
        let n = self.norm_sq();
        if !(n > 0.0) {
            return Err(Error::arg("cannot normalize a zero field"));
        }
        Ok(self.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    /// The spatial field at time sample `t` of a space-time field.
    pub fn time_slice(&self, t: usize) -> Result<ScalarField> {
        if t >= self.grid.time_samples() {
            return Err(Error::arg(format!("time sample {t} out of range")));
        }
        let n = self.grid.slice_len();
        Ok(ScalarField {
            grid: self.grid.spatial(),
            values: self.values[t * n..(t + 1) * n].to_vec(),
        })
    }
}

/// Real `codim`-vectors on a grid, stored point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    codim: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Grid, codim: usize, values: Vec<f64>) -> Result<Self> {
        if codim == 0 || codim > MAX_DIM {
            return Err(Error::arg(format!("codimension {codim} outside 1..={MAX_DIM}")));
        }
        if values.len() != grid.len() * codim {
            return Err(Error::arg(format!(
                "{} values for {} points of codimension {codim}",
                values.len(),
                grid.len()
            )));
        }
        Ok(VectorField { grid, codim, values })
    }

    /// Samples `f(coords, out)` at every point.
    pub fn from_fn<F>(grid: &Grid, codim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        if codim == 0 || codim > MAX_DIM {
            return Err(Error::arg(format!("codimension {codim} outside 1..={MAX_DIM}")));
        }
        let d = grid.dim();
        let mut values = vec![0.0; grid.len() * codim];
        exec::for_each_chunk_mut(&mut values, codim * 1024, |c, chunk| {
            let first = c * 1024;
            for (k, out) in chunk.chunks_mut(codim).enumerate() {
                f(&grid.coords(first + k)[..d], out);
            }
        });
        Ok(VectorField {
            grid: grid.clone(),
            codim,
            values,
        })
    }

    /// The identity position field `r(x) = x` (time axis included as `x0`).
    pub fn identity(grid: &Grid) -> Self {
        let d = grid.dim();
        Self::from_fn(grid, d, |x, out| out.copy_from_slice(x)).expect("dim within MAX_DIM")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, p: usize) -> &[f64] {
        &self.values[p * self.codim..(p + 1) * self.codim]
    }

    pub fn component(&self, a: usize) -> Vec<f64> {
        self.values.iter().skip(a).step_by(self.codim).copied().collect()
    }

    /// Keeps components `range` (e.g. the spatial part of `(ct, X)`).
    pub fn select(&self, range: std::ops::Range<usize>) -> Result<VectorField> {
        if range.is_empty() || range.end > self.codim {
            return Err(Error::arg("component range out of bounds"));
        }
        let k = range.len();
        let mut values = Vec::with_capacity(self.grid.len() * k);
        for p in 0..self.grid.len() {
            values.extend_from_slice(&self.at(p)[range.clone()]);
        }
        VectorField::new(self.grid.clone(), k, values)
    }

    pub fn time_slice(&self, t: usize) -> Result<VectorField> {
        if t >= self.grid.time_samples() {
            return Err(Error::arg(format!("time sample {t} out of range")));
        }
        let n = self.grid.slice_len() * self.codim;
        Ok(VectorField {
            grid: self.grid.spatial(),
            codim: self.codim,
            values: self.values[t * n..(t + 1) * n].to_vec(),
        })
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        if self.codim != other.codim {
            return Err(Error::arg("codimension mismatch"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// First partial derivative along `axis`.
pub fn partial<F: Differentiable>(field: &F, axis: usize) -> Result<F> {
    field.partial(axis)
}

/// Second partial derivative along `axis_i`, `axis_j`.
pub fn second_partial<F: Differentiable>(field: &F, axis_i: usize, axis_j: usize) -> Result<F> {
    field.second_partial(axis_i, axis_j)
}

/// Trapezoid integral of `field * weight` over every axis of the grid.
pub fn integrate(field: &ScalarField, weight: Option<&ScalarField>) -> Result<Complex64> {
    let grid = field.grid();
    if let Some(w) = weight {
        grid.check_same(w.grid())?;
    }
    let value = |p: usize| match weight {
        Some(w) => field.values[p] * w.values[p],
        None => field.values[p],
    };
    let re = grid.quadrature(|p| value(p).re);
    let im = grid.quadrature(|p| value(p).im);
    Ok(Complex64::new(re, im))
}
