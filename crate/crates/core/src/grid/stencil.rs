//! Second-order finite-difference stencils.
//!
//! Interior points use central differences; the first and last point of an
//! axis use one-sided second-order closures, so every stencil is exact for
//! quadratics (first derivatives) and cubics (boundary second derivatives on
//! axes with at least four points). Stencils are written in differences from
//! the centre value, so constant data differentiates to exactly zero.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::exec;

pub trait Sample:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Sample for f64 {}
impl Sample for Complex64 {}

const BLOCK: usize = 2048;

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.dim() {
        Err(Error::arg(format!(
            "axis {axis} out of range for a {}-dimensional grid",
            grid.dim()
        )))
    } else {
        Ok(())
    }
}

/// `∂f/∂x_axis` for interleaved data with `ncomp` components per point.
pub(crate) fn diff1<T: Sample>(grid: &Grid, data: &[T], ncomp: usize, axis: usize) -> Vec<T> {
    let n = grid.points()[axis];
    let s = grid.stride(axis) * ncomp;
    let inv2h = 0.5 / grid.spacing(axis);
    let mut out = data.to_vec();
    exec::for_each_chunk_mut(&mut out, BLOCK, |c, chunk| {
        let first = c * BLOCK;
        for (k, o) in chunk.iter_mut().enumerate() {
            let e = first + k;
            let i = (e / s) % n;
            *o = if i == 0 {
                ((data[e + s] - data[e]) * 4.0 - (data[e + 2 * s] - data[e])) * inv2h
            } else if i + 1 == n {
                ((data[e - 2 * s] - data[e]) - (data[e - s] - data[e]) * 4.0) * inv2h
            } else {
                (data[e + s] - data[e - s]) * inv2h
            };
        }
    });
    out
}

/// `∂²f/∂x_axis²`.
pub(crate) fn diff2<T: Sample>(grid: &Grid, data: &[T], ncomp: usize, axis: usize) -> Vec<T> {
    let n = grid.points()[axis];
    let s = grid.stride(axis) * ncomp;
    let h = grid.spacing(axis);
    let inv_h2 = 1.0 / (h * h);
    let mut out = data.to_vec();
    exec::for_each_chunk_mut(&mut out, BLOCK, |c, chunk| {
        let first = c * BLOCK;
        for (k, o) in chunk.iter_mut().enumerate() {
            let e = first + k;
            let i = (e / s) % n;
            *o = if i == 0 {
                if n >= 4 {
                    ((data[e + 2 * s] - data[e]) * 4.0 - (data[e + s] - data[e]) * 5.0 - (data[e + 3 * s] - data[e])) * inv_h2
                } else {
                    ((data[e + 2 * s] - data[e + s]) - (data[e + s] - data[e])) * inv_h2
                }
            } else if i + 1 == n {
                if n >= 4 {
                    ((data[e - 2 * s] - data[e]) * 4.0 - (data[e - s] - data[e]) * 5.0 - (data[e - 3 * s] - data[e])) * inv_h2
                } else {
                    ((data[e - 2 * s] - data[e - s]) - (data[e - s] - data[e])) * inv_h2
                }
            } else {
                ((data[e + s] - data[e]) + (data[e - s] - data[e])) * inv_h2
            };
        }
    });
    out
}

/// Mixed or pure second derivative. Mixed partials always apply the lower
/// axis first, so the result is bitwise symmetric in `(i, j)`.
pub(crate) fn diff_ij<T: Sample>(grid: &Grid, data: &[T], ncomp: usize, i: usize, j: usize) -> Vec<T> {
    if i == j {
        diff2(grid, data, ncomp, i)
    } else {
        let (a, b) = (i.min(j), i.max(j));
        diff1(grid, &diff1(grid, data, ncomp, a), ncomp, b)
    }
}

/// Fields that can be differentiated along grid axes.
pub trait Differentiable: Sized {
    fn partial(&self, axis: usize) -> Result<Self>;
    fn second_partial(&self, axis_i: usize, axis_j: usize) -> Result<Self>;
}

impl Differentiable for ScalarField {
    fn partial(&self, axis: usize) -> Result<Self> {
        check_axis(self.grid(), axis)?;
        let values = diff1(self.grid(), self.values(), 1, axis);
        ScalarField::new(self.grid().clone(), values)
    }

    fn second_partial(&self, axis_i: usize, axis_j: usize) -> Result<Self> {
        check_axis(self.grid(), axis_i)?;
        check_axis(self.grid(), axis_j)?;
        let values = diff_ij(self.grid(), self.values(), 1, axis_i, axis_j);
        ScalarField::new(self.grid().clone(), values)
    }
}

impl Differentiable for VectorField {
    fn partial(&self, axis: usize) -> Result<Self> {
        check_axis(self.grid(), axis)?;
        let values = diff1(self.grid(), self.values(), self.codim(), axis);
        VectorField::new(self.grid().clone(), self.codim(), values)
    }

    fn second_partial(&self, axis_i: usize, axis_j: usize) -> Result<Self> {
        check_axis(self.grid(), axis_i)?;
        check_axis(self.grid(), axis_j)?;
        let values = diff_ij(self.grid(), self.values(), self.codim(), axis_i, axis_j);
        VectorField::new(self.grid().clone(), self.codim(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{partial, second_partial};
    use std::f64::consts::PI;

    fn interior_max_err(f: &ScalarField, exact: impl Fn(&[f64]) -> f64) -> f64 {
        let g = f.grid();
        (0..g.len())
            .filter(|&p| g.is_interior_all(p))
            .map(|p| (f.values()[p].re - exact(&g.coords(p)[..g.dim()])).abs())
            .fold(0.0, f64::max)
    }

    fn max_err(f: &ScalarField, exact: impl Fn(&[f64]) -> f64) -> f64 {
        let g = f.grid();
        (0..g.len())
            .map(|p| (f.values()[p].re - exact(&g.coords(p)[..g.dim()])).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_and_affine_are_exact() {
        let g = Grid::new(&[0.0, -1.0, 2.0], &[1.0, 1.0, 3.0], &[5, 6, 3]).unwrap();
        let c = ScalarField::from_real_fn(&g, |_| 4.2);
        for a in 0..3 {
            assert!(partial(&c, a).unwrap().max_abs() < 1e-12);
        }
        let x1 = ScalarField::from_real_fn(&g, |x| x[0]);
        let d = partial(&x1, 0).unwrap();
        assert!(max_err(&d, |_| 1.0) < 1e-12);
        let aff = ScalarField::from_real_fn(&g, |x| 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 1.0);
        assert!(max_err(&partial(&aff, 1).unwrap(), |_| -2.0) < 1e-12);
        assert!(max_err(&partial(&aff, 2).unwrap(), |_| 0.5) < 1e-12);
    }

    #[test]
    fn axis_out_of_range() {
        let g = Grid::unit_cube(2, 4).unwrap();
        let f = ScalarField::zeros(&g);
        assert!(matches!(partial(&f, 2), Err(Error::Argument(_))));
        assert!(matches!(second_partial(&f, 0, 5), Err(Error::Argument(_))));
    }

    #[test]
    fn sine_derivative_converges_quadratically() {
        let err = |n: usize| {
            let g = Grid::unit_cube(1, n).unwrap();
            let f = ScalarField::from_real_fn(&g, |x| (PI * x[0]).sin());
            max_err(&partial(&f, 0).unwrap(), |x| PI * (PI * x[0]).cos())
        };
        // halve h each time: (n-1) doubles
        let e = [err(33), err(65), err(129)];
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "order {order}");
        }
        assert!(err(64) < 1e-2);
    }

    #[test]
    fn mixed_partials() {
        let g = Grid::unit_cube(2, 6).unwrap();
        let f = ScalarField::from_real_fn(&g, |x| x[0] * x[1]);
        assert!(interior_max_err(&second_partial(&f, 0, 1).unwrap(), |_| 1.0) < 1e-12);
        let c = ScalarField::from_real_fn(&g, |_| 7.0);
        assert!(second_partial(&c, 1, 1).unwrap().max_abs() < 1e-9);
        assert!(second_partial(&c, 0, 1).unwrap().max_abs() < 1e-9);
        let q = ScalarField::from_real_fn(&g, |x| x[0] * x[0]);
        assert!(max_err(&second_partial(&q, 0, 0).unwrap(), |_| 2.0) < 1e-9);
    }

    #[test]
    fn mixed_sine_converges() {
        let err = |n: usize| {
            let g = Grid::unit_cube(2, n).unwrap();
            let f = ScalarField::from_real_fn(&g, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
            let d = second_partial(&f, 0, 1).unwrap();
            interior_max_err(&d, |x| PI * PI * (PI * x[0]).cos() * (PI * x[1]).cos())
        };
        let (a, b, c) = (err(17), err(33), err(65));
        assert!((a / b).log2() >= 1.9);
        assert!((b / c).log2() >= 1.9);
    }

    #[test]
    fn vector_field_components_independent() {
        let g = Grid::unit_cube(2, 5).unwrap();
        let r = VectorField::from_fn(&g, 2, |x, o| {
            o[0] = 2.0 * x[0];
            o[1] = x[0] * x[1];
        })
        .unwrap();
        let d1 = partial(&r, 1).unwrap();
        for p in 0..g.len() {
            let x = g.coords(p);
            assert!(d1.at(p)[0].abs() < 1e-12);
            assert!((d1.at(p)[1] - x[0]).abs() < 1e-12);
        }
    }
}
