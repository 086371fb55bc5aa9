//! Stationary Klein-Gordon problem: Dirichlet Laplacian eigenpairs, the
//! `E₂(E₁)` dispersion relation and separable solutions
//! `φ = e^{-iE₁t/ħ} φ₂(x)`.
//!
//! The eigenproblem `-Δ_h φ₂ = λ φ₂` is posed on interior points of a spatial
//! grid (the `2d+1`-point stencil); boundary values are zero.

mod lanczos;
mod operator;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::energy::PhysicalConstants;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, ScalarField};
use operator::InteriorLaplacian;

#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Eigenvalue of `-Δ_h` (1/m²).
    pub lambda: f64,
    /// Real eigenvector, zero on the boundary, `∫ φ₂² dx = 1`.
    pub phi2: ScalarField,
    /// `‖-Δ_h φ₂ - λ φ₂‖ / ‖φ₂‖`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    pub seed: u64,
    /// Residual tolerance relative to `‖φ₂‖`.
    pub tol: f64,
    /// Interior dimensions up to this size use the dense solver.
    pub dense_limit: usize,
    /// Largest Krylov basis kept in memory, in vectors.
    pub max_basis: usize,
    /// Lanczos runs (restarts included) before giving up.
    pub max_runs: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            seed: 0x6b67_7661,
            tol: 1e-8,
            dense_limit: 2000,
            max_basis: 400,
            max_runs: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Dense,
    Lanczos,
}

/// The `k` smallest Dirichlet Laplacian eigenpairs with default options.
pub fn laplacian_eigs(grid: &Grid, k: usize) -> Result<Vec<EigenPair>> {
    laplacian_eigs_with(grid, k, &EigOptions::default())
}

pub fn laplacian_eigs_with(grid: &Grid, k: usize, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    let op = InteriorLaplacian::new(grid)?;
    let n = op.len();
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    if k > n {
        return Err(Error::arg(format!("k = {k} exceeds the interior dimension {n}")));
    }
    let method = if n <= opts.dense_limit {
        Method::Dense
    } else {
        Method::Lanczos
    };
    let (values, vectors) = match method {
        Method::Dense => dense(&op, k),
        Method::Lanczos => {
            let budget = opts.max_basis.max(2 * k + 10);
            // keep the Krylov basis under roughly 400 MB
            let max_basis = budget.min((50_000_000 / n).max(k + 20));
            let settings = lanczos::Settings {
                tol: opts.tol,
                max_basis,
                max_runs: opts.max_runs,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let found = lanczos::smallest(&op, k, &mut rng, &settings)?;
            (found.values, found.vectors)
        }
    };
    let mut pairs: Vec<(f64, Vec<f64>)> = values.into_iter().zip(vectors).collect();
    pairs.iter_mut().for_each(|(_, x)| fix_sign(x));
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(k);
    order_clusters(&mut pairs);

    let cell: f64 = (0..grid.dim()).map(|a| grid.spacing(a)).product();
    let scale = 1.0 / cell.sqrt();
    let mut out = Vec::with_capacity(k);
    let mut worst = 0.0f64;
    for (lambda, x) in pairs {
        let residual = lanczos::residual(&op, &x, lambda);
        worst = worst.max(residual);
        let full = op.scatter(grid, &x);
        let phi2 = ScalarField::new(
            grid.clone(),
            full.into_iter().map(|v| Complex64::new(v * scale, 0.0)).collect(),
        )?;
        out.push(EigenPair { lambda, phi2, residual });
    }
    if worst > opts.tol {
        return Err(Error::Convergence {
            requested: k,
            converged: out.iter().filter(|p| p.residual <= opts.tol).count(),
            residual: worst,
        });
    }
    Ok(out)
}

fn dense(op: &InteriorLaplacian, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = op.len();
    let a = DMatrix::from_row_slice(n, n, &op.dense());
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(k);
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    let values = vectors.iter().map(|x| lanczos::rayleigh(op, x)).collect();
    (values, vectors)
}

/// First component above round-off made positive.
fn fix_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-10 * max) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Within runs of eigenvalues closer than 1e-8 relative, orders vectors
/// lexicographically; the cluster's values stay ascending by position.
fn order_clusters(pairs: &mut [(f64, Vec<f64>)]) {
    let mut lo = 0;
    while lo < pairs.len() {
        let mut hi = lo + 1;
        while hi < pairs.len() && (pairs[hi].0 - pairs[hi - 1].0).abs() <= 1e-8 * pairs[hi].0.abs().max(1e-300) {
            hi += 1;
        }
        let values: Vec<f64> = pairs[lo..hi].iter().map(|p| p.0).collect();
        pairs[lo..hi].sort_by(|a, b| lexicographic(&a.1, &b.1));
        for (p, v) in pairs[lo..hi].iter_mut().zip(values) {
            p.0 = v;
        }
        lo = hi;
    }
}

/// `E₂ = -γE₁²/(2c²ħ²) + mc² - E₁`.
pub fn dispersion_e2(e1: f64, consts: &PhysicalConstants) -> f64 {
    let c = consts.c;
    let h = consts.hbar;
    -consts.gamma * e1 * e1 / (2.0 * c * c * h * h) + consts.rest_energy() - e1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoots {
    /// Root continuous with the small-`|E₁|` branch; the CLI calls it principal.
    pub e1_plus: f64,
    pub e1_minus: f64,
    /// `1 + (2γ/(c²ħ²))(mc² + γλ/2)`.
    pub discriminant: f64,
}

/// Roots of `(γ/(2c²ħ²))E₁² + E₁ - mc² - γλ/2 = 0`, i.e. `E₂(E₁) = -γλ/2`.
pub fn solve_e1(lambda: f64, consts: &PhysicalConstants) -> Result<DispersionRoots> {
    consts.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!("eigenvalue {lambda} must be finite and nonnegative")));
    }
    let c = consts.c;
    let h = consts.hbar;
    let a = consts.gamma / (2.0 * c * c * h * h);
    let big_c = consts.rest_energy() + 0.5 * consts.gamma * lambda;
    let disc = 1.0 + 4.0 * a * big_c;
    let root = disc.sqrt();
    Ok(DispersionRoots {
        e1_plus: 2.0 * big_c / (1.0 + root),
        e1_minus: -(1.0 + root) / (2.0 * a),
        discriminant: disc,
    })
}

/// Samples `e^{-iE₁t/ħ} φ₂(x)` on a space-time grid whose spatial part is the
/// eigenpair's grid; `t = x₀/c`.
pub fn stationary_state(pair: &EigenPair, e1: f64, grid: &Grid, consts: &PhysicalConstants) -> Result<ScalarField> {
    consts.validate()?;
    if !grid.has_time_axis() || grid.spatial() != *pair.phi2.grid() {
        return Err(Error::arg("stationary state needs a space-time grid over the eigenpair's spatial grid"));
    }
    let slice = grid.slice_len();
    let phi2 = pair.phi2.values();
    let values = exec::map_collect(grid.len(), |p| {
        let t = grid.coord(0, p / slice) / consts.c;
        Complex64::from_polar(1.0, -e1 * t / consts.hbar) * phi2[p % slice]
    });
    ScalarField::new(grid.clone(), values)
}
