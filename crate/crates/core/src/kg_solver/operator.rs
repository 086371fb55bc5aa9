//! Matrix-free Dirichlet Laplacian on the interior points of a grid.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::Grid;

/// `-Δ_h` restricted to interior points, boundary values fixed at zero.
pub(crate) struct InteriorLaplacian {
    dims: Vec<usize>,
    strides: Vec<usize>,
    inv_h2: Vec<f64>,
    len: usize,
}

impl InteriorLaplacian {
    pub fn new(grid: &Grid) -> Result<Self> {
        if grid.has_time_axis() {
            return Err(Error::arg("the eigenproblem lives on a spatial grid"));
        }
        let dims: Vec<usize> = grid.points().iter().map(|&n| n.saturating_sub(2)).collect();
        let len: usize = dims.iter().product();
        if len == 0 {
            return Err(Error::arg("grid has no interior points"));
        }
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let inv_h2 = (0..grid.dim()).map(|a| grid.spacing(a).powi(-2)).collect();
        Ok(InteriorLaplacian {
            dims,
            strides,
            inv_h2,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Upper bound on the spectrum, `Σ 4/h²`.
    pub fn norm_bound(&self) -> f64 {
        self.inv_h2.iter().map(|v| 4.0 * v).sum()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        exec::for_each_chunk_mut(y, exec::REDUCE_CHUNK, |c, ys| {
            let off = c * exec::REDUCE_CHUNK;
            for (k, yk) in ys.iter_mut().enumerate() {
                let i = off + k;
                let mut acc = 0.0;
                let mut rem = i;
                for a in 0..self.dims.len() {
                    let s = self.strides[a];
                    let ia = rem / s;
                    rem %= s;
                    let mut v = 2.0 * x[i];
                    if ia > 0 {
                        v -= x[i - s];
                    }
                    if ia + 1 < self.dims[a] {
                        v -= x[i + s];
                    }
                    acc += self.inv_h2[a] * v;
                }
                *yk = acc;
            }
        });
    }

    /// Full matrix, row-major, for the dense path.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.len;
        let mut m = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        m
    }

    /// Scatters an interior vector into a full grid vector with zero boundary.
    pub fn scatter(&self, grid: &Grid, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        let mut idx = vec![0usize; self.dims.len()];
        for (i, &xi) in x.iter().enumerate() {
            let mut rem = i;
            for a in 0..self.dims.len() {
                idx[a] = rem / self.strides[a] + 1;
                rem %= self.strides[a];
            }
            out[grid.flat_index(&idx)] = xi;
        }
        out
    }
}
