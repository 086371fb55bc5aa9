//! Per-point dense kernels for matrices of order at most four.

use crate::grid::MAX_DIM;

pub(crate) type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// LU factorization with partial pivoting of the leading `n x n` block.
pub(crate) struct Lu {
    n: usize,
    lu: Mat,
    perm: [usize; MAX_DIM],
    sign: f64,
    min_pivot: f64,
    scale: f64,
}

impl Lu {
    pub fn new(a: &Mat, n: usize) -> Lu {
        let mut lu = *a;
        let mut perm = [0, 1, 2, 3];
        let mut sign = 1.0;
        let mut scale: f64 = 0.0;
        for row in lu.iter().take(n) {
            for v in row.iter().take(n) {
                scale = scale.max(v.abs());
            }
        }
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[i][k].abs() > lu[p][k].abs() {
                    p = i;
                }
            }
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let piv = lu[k][k];
            min_pivot = min_pivot.min(piv.abs());
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i][k] / piv;
                lu[i][k] = f;
                for j in k + 1..n {
                    lu[i][j] -= f * lu[k][j];
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            sign,
            min_pivot,
            scale,
        }
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |d, k| d * self.lu[k][k])
    }

    /// Smallest pivot relative to the largest entry; a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.min_pivot / self.scale
        }
    }

    pub fn is_singular(&self, tol: f64) -> bool {
        !(self.pivot_ratio() > tol)
    }

    pub fn solve(&self, b: &[f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let n = self.n;
        let mut x = [0.0; MAX_DIM];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        x
    }

    pub fn inverse(&self) -> Mat {
        let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
        for c in 0..self.n {
            let mut e = [0.0; MAX_DIM];
            e[c] = 1.0;
            let col = self.solve(&e);
            for r in 0..self.n {
                inv[r][c] = col[r];
            }
        }
        inv
    }
}
