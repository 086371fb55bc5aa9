//! Lanczos iteration with full reorthogonalization and locking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::operator::InteriorLaplacian;
use crate::error::{Error, Result};
use crate::exec;

pub(crate) struct Settings {
    pub tol: f64,
    pub max_basis: usize,
    pub max_runs: usize,
}

/// Orthonormal eigenvectors (Euclidean) with their Rayleigh quotients.
pub(crate) struct Locked {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn norm(x: &[f64]) -> f64 {
    exec::dot(x, x).sqrt()
}

/// Two passes of classical Gram-Schmidt against every vector in `bases`.
fn orthogonalize(w: &mut [f64], bases: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for basis in bases {
            let coef = exec::map_collect(basis.len(), |j| {
                let v = &basis[j];
                let mut acc = 0.0;
                for c in 0..w.len().div_ceil(exec::REDUCE_CHUNK) {
                    let lo = c * exec::REDUCE_CHUNK;
                    let hi = (lo + exec::REDUCE_CHUNK).min(w.len());
                    let mut part = 0.0;
                    for i in lo..hi {
                        part += v[i] * w[i];
                    }
                    acc += part;
                }
                acc
            });
            exec::for_each_chunk_mut(w, exec::REDUCE_CHUNK, |c, ws| {
                let off = c * exec::REDUCE_CHUNK;
                for (j, v) in basis.iter().enumerate() {
                    let cj = coef[j];
                    for (k, wk) in ws.iter_mut().enumerate() {
                        *wk -= cj * v[off + k];
                    }
                }
            });
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, locked: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut x, &[locked]);
        let nx = norm(&x);
        if nx > 1e-8 {
            x.iter_mut().for_each(|v| *v /= nx);
            return x;
        }
    }
}

struct Ritz {
    values: Vec<f64>,
    /// Column `i` holds the coefficients of Ritz vector `i`.
    coeffs: DMatrix<f64>,
    estimates: Vec<f64>,
}

fn ritz(alpha: &[f64], beta: &[f64]) -> Ritz {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let last = beta[m - 1];
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let estimates = order
        .iter()
        .map(|&i| (last * eig.eigenvectors[(m - 1, i)]).abs())
        .collect();
    let coeffs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ritz {
        values,
        coeffs,
        estimates,
    }
}

fn combine(basis: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut x = vec![0.0; n];
    exec::for_each_chunk_mut(&mut x, exec::REDUCE_CHUNK, |c, xs| {
        let off = c * exec::REDUCE_CHUNK;
        for (j, v) in basis.iter().enumerate() {
            let cj = coeffs[(j, col)];
            for (k, xk) in xs.iter_mut().enumerate() {
                *xk += cj * v[off + k];
            }
        }
    });
    x
}

struct Run {
    /// Converged pairs from the bottom of the deflated spectrum.
    converged: Vec<(f64, Vec<f64>)>,
    /// Lowest unconverged Ritz vector, used to restart.
    restart: Option<Vec<f64>>,
    worst: f64,
}

/// One Lanczos run on the operator deflated by `locked`.
fn run(op: &InteriorLaplacian, locked: &[Vec<f64>], start: Vec<f64>, want: usize, s: &Settings) -> Run {
    let n = op.len();
    let room = n - locked.len();
    let max_basis = s.max_basis.min(room).max(1);
    let scale = op.norm_bound();
    let accept = 0.1 * s.tol;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut alpha = Vec::with_capacity(max_basis);
    let mut beta: Vec<f64> = Vec::with_capacity(max_basis);
    let mut q = start;
    let mut w = vec![0.0; n];
    let r = loop {
        op.apply(&q, &mut w);
        let a = exec::dot(&q, &w);
        exec::axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            exec::axpy(-beta[beta.len() - 1], prev, &mut w);
        }
        basis.push(q);
        alpha.push(a);
        orthogonalize(&mut w, &[locked, &basis]);
        let b = norm(&w);
        beta.push(b);

        let m = basis.len();
        let exhausted = b <= 1e-13 * scale || m == max_basis;
        if exhausted || m % 10 == 0 {
            let r = ritz(&alpha, &beta);
            let take = want.min(m);
            let done = (0..take).take_while(|&i| r.estimates[i] <= accept || b <= 1e-13 * scale).count();
            if done == take || exhausted {
                break r;
            }
        }
        q = w.iter().map(|v| v / b).collect();
    };
    let b = beta[beta.len() - 1];
    let mut converged = Vec::new();
    let mut worst = 0.0f64;
    let mut restart = None;
    for i in 0..want.min(basis.len()) {
        if r.estimates[i] <= accept || b <= 1e-13 * scale {
            converged.push((r.values[i], combine(&basis, &r.coeffs, i)));
        } else {
            worst = worst.max(r.estimates[i]);
            restart = Some(combine(&basis, &r.coeffs, i));
            break;
        }
    }
    Run {
        converged,
        restart,
        worst,
    }
}

/// The `k` smallest eigenpairs of `op`.
pub(crate) fn smallest(op: &InteriorLaplacian, k: usize, rng: &mut ChaCha8Rng, s: &Settings) -> Result<Locked> {
    let n = op.len();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut pending: Option<Vec<f64>> = None;
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    let mut verified = false;
    while !verified {
        if runs == s.max_runs {
            return Err(Error::Convergence {
                requested: k,
                converged: values.len().min(k),
                residual: worst,
            });
        }
        runs += 1;
        let verifying = values.len() >= k;
        if verifying && locked.len() == n {
            break;
        }
        let start = match pending.take() {
            Some(mut x) => {
                orthogonalize(&mut x, &[&locked]);
                let nx = norm(&x);
                if nx > 1e-8 {
                    x.iter_mut().for_each(|v| *v /= nx);
                    x
                } else {
                    random_unit(n, rng, &locked)
                }
            }
            None => random_unit(n, rng, &locked),
        };
        let want = if verifying { 1 } else { k - values.len() };
        let out = run(op, &locked, start, want, s);
        worst = out.worst;
        pending = out.restart;
        if verifying {
            let kth = sorted(&values)[k - 1];
            match out.converged.first() {
                Some((theta, _)) if *theta < kth - 1e-8 * kth.abs().max(1.0) => {}
                Some(_) => {
                    verified = true;
                    continue;
                }
                None => continue,
            }
        }
        for (_, mut x) in out.converged {
            orthogonalize(&mut x, &[&locked]);
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            values.push(rayleigh(op, &x));
            locked.push(x);
        }
    }
    Ok(Locked {
        values,
        vectors: locked,
    })
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

pub(crate) fn rayleigh(op: &InteriorLaplacian, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    exec::dot(x, &y) / exec::dot(x, x)
}

/// `‖A x - λ x‖ / ‖x‖`.
pub(crate) fn residual(op: &InteriorLaplacian, x: &[f64], lambda: f64) -> f64 {
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    exec::axpy(-lambda, x, &mut y);
    norm(&y) / norm(x)
}
