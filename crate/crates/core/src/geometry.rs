//! Discrete differential geometry of a sampled position field.
//!
//! Given `r(x)` on a grid, the tangent basis is `g_k = ∂r/∂x_k`, the metric is
//! the Gram matrix of the basis under the chosen signature, and the Christoffel
//! symbols are the coefficients of `∂²r/∂x_i∂x_j` in the tangent basis. Both
//! curvature energy densities are Hermitian forms in the wave field and are
//! returned as complex fields whose imaginary part is rounding noise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{stencil, Differentiable, Grid, ScalarField, VectorField, MAX_DIM};
use crate::linalg::{Lu, Mat};

/// Pivot ratio below which a Gram matrix counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Euclidean,
    /// `y·z = -y0 z0 + Σ yi zi`; slot 0 is time-like.
    Minkowski,
}

impl Signature {
    pub fn dot(self, y: &[f64], z: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), z.len());
        let s: f64 = y.iter().zip(z).map(|(a, b)| a * b).sum();
        match self {
            Signature::Euclidean => s,
            Signature::Minkowski => s - 2.0 * y[0] * z[0],
        }
    }

    fn weight(self, a: usize) -> f64 {
        match (self, a) {
            (Signature::Minkowski, 0) => -1.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signature::Euclidean => "euclidean",
            Signature::Minkowski => "minkowski",
        }
    }
}

/// Tangent vectors `g_k = ∂r/∂x_k`, one field per grid axis.
pub fn tangent_basis(r: &VectorField) -> Result<Vec<VectorField>> {
    let d = r.grid().dim();
    if r.codim() != d {
        return Err(Error::arg(format!(
            "position field has codimension {} on a {d}-axis grid; the Jacobian must be square",
            r.codim()
        )));
    }
    (0..d).map(|k| r.partial(k)).collect()
}

#[derive(Clone, Debug)]
pub struct MetricData {
    grid: Grid,
    dim: usize,
    signature: Signature,
    g: Vec<f64>,
    g_inv: Vec<f64>,
    det: Vec<f64>,
}

impl MetricData {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Row-major `g_ij` at point `p`.
    pub fn g(&self, p: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.g[p * dd..(p + 1) * dd]
    }

    /// Row-major `g^ij` at point `p`.
    pub fn g_inv(&self, p: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.g_inv[p * dd..(p + 1) * dd]
    }

    pub fn det(&self, p: usize) -> f64 {
        self.det[p]
    }

    /// `√|g|`, the volume weight (`√g` or `√(-g)` depending on signature).
    pub fn volume_weight(&self, p: usize) -> f64 {
        self.det[p].abs().sqrt()
    }

    /// Volume weights as a field, ready for [`crate::grid::integrate`].
    pub fn volume_field(&self) -> ScalarField {
        let values = exec::map_collect(self.grid.len(), |p| Complex64::new(self.volume_weight(p), 0.0));
        ScalarField::new(self.grid.clone(), values).expect("sized from grid")
    }

    /// Flat metric (`I` or `diag(-1,1,..)`) on `grid`.
    pub fn flat(grid: &Grid, signature: Signature) -> MetricData {
        let d = grid.dim();
        let mut one = vec![0.0; d * d];
        for a in 0..d {
            one[a * d + a] = signature.weight(a);
        }
        let g: Vec<f64> = one.iter().copied().cycle().take(d * d * grid.len()).collect();
        let det = (0..d).map(|a| signature.weight(a)).product::<f64>();
        MetricData {
            grid: grid.clone(),
            dim: d,
            signature,
            g_inv: g.clone(),
            g,
            det: vec![det; grid.len()],
        }
    }
}

/// Metric, inverse and determinant of a tangent basis.
pub fn metric(basis: &[VectorField], signature: Signature) -> Result<MetricData> {
    let d = basis.len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::arg("tangent basis must have between 1 and 4 vectors"));
    }
    let grid = basis[0].grid().clone();
    for b in basis {
        b.grid().check_same(&grid)?;
        if b.codim() != d {
            return Err(Error::arg("tangent vectors must have one component per basis vector"));
        }
    }
    let per_point = exec::map_collect(grid.len(), |p| {
        let mut m: Mat = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in i..d {
                let v = signature.dot(basis[i].at(p), basis[j].at(p));
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let lu = Lu::new(&m, d);
        let det = lu.det();
        if lu.is_singular(SINGULAR_TOL) {
            return Err(Error::DegenerateMetric {
                point: grid.point_label(p),
                det,
            });
        }
        let ok = match signature {
            Signature::Euclidean => det > 0.0,
            Signature::Minkowski => det < 0.0,
        };
        if !ok {
            return Err(Error::SignatureViolation {
                point: grid.point_label(p),
                det,
                signature: signature.name(),
            });
        }
        Ok((m, lu.inverse(), det))
    });
    let mut g = Vec::with_capacity(grid.len() * d * d);
    let mut g_inv = Vec::with_capacity(grid.len() * d * d);
    let mut dets = Vec::with_capacity(grid.len());
    for item in per_point {
        let (m, inv, det) = item?;
        for i in 0..d {
            g.extend_from_slice(&m[i][..d]);
            g_inv.extend_from_slice(&inv[i][..d]);
        }
        dets.push(det);
    }
    Ok(MetricData {
        grid,
        dim: d,
        signature,
        g,
        g_inv,
        det: dets,
    })
}

/// `Γ^s_ij` per point, indexed `[s][i][j]`.
#[derive(Clone, Debug)]
pub struct ChristoffelField {
    grid: Grid,
    dim: usize,
    gamma: Vec<f64>,
}

impl ChristoffelField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, s: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.gamma[p * d * d * d + (s * d + i) * d + j]
    }

    /// All `d³` symbols at point `p`.
    pub fn at(&self, p: usize) -> &[f64] {
        let n = self.dim * self.dim * self.dim;
        &self.gamma[p * n..(p + 1) * n]
    }

    /// Largest `|Γ|` over the grid.
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Christoffel symbols from `∂²r/∂x_i∂x_j = Σ_s Γ^s_ij g_s`, solved by
/// projecting onto the tangent basis: `Γ^s_ij = Σ_m g^{sm} (∂²r/∂x_i∂x_j · g_m)`.
pub fn christoffel(r: &VectorField, m: &MetricData) -> Result<ChristoffelField> {
    let grid = r.grid();
    grid.check_same(m.grid())?;
    let d = grid.dim();
    if r.codim() != d || m.dim() != d {
        return Err(Error::arg("position field, metric and grid dimensions disagree"));
    }
    let basis = tangent_basis(r)?;
    // second derivatives for i <= j
    let mut second = Vec::new();
    for i in 0..d {
        for j in i..d {
            second.push(stencil::diff_ij(grid, r.values(), d, i, j));
        }
    }
    let pair = |i: usize, j: usize| {
        let (a, b) = (i.min(j), i.max(j));
        a * d - a * (a + 1) / 2 + b
    };
    let sig = m.signature();
    let n3 = d * d * d;
    let mut gamma = vec![0.0; grid.len() * n3];
    exec::for_each_chunk_mut(&mut gamma, n3 * 256, |c, chunk| {
        let first = c * 256;
        for (k, out) in chunk.chunks_mut(n3).enumerate() {
            let p = first + k;
            let ginv = m.g_inv(p);
            for i in 0..d {
                for j in i..d {
                    let rij = &second[pair(i, j)][p * d..(p + 1) * d];
                    let mut proj = [0.0; MAX_DIM];
                    for (mm, pm) in proj.iter_mut().enumerate().take(d) {
                        *pm = sig.dot(rij, basis[mm].at(p));
                    }
                    for s in 0..d {
                        let v: f64 = (0..d).map(|mm| ginv[s * d + mm] * proj[mm]).sum();
                        out[(s * d + i) * d + j] = v;
                        out[(s * d + j) * d + i] = v;
                    }
                }
            }
        }
    });
    Ok(ChristoffelField {
        grid: grid.clone(),
        dim: d,
        gamma,
    })
}

fn gradient(phi: &ScalarField, d: usize) -> Result<Vec<ScalarField>> {
    (0..d).map(|k| phi.partial(k)).collect()
}

/// Christoffel-expanded curvature density
///
/// `R̂ = Σ g^{ij} g^{kl} (g_jl ∂_iφ ∂_kφ* + φ ∂_kφ* Γ^s_ij g_sl
///       + φ* ∂_iφ Γ^p_kl g_pj + |φ|² Γ^s_ij Γ^p_kl g_sp)`.
///
/// Evaluated as `w^a g_ab (w^b)*` with `w^a = Σ_ij g^{ij} (δ_aj ∂_iφ + φ Γ^a_ij)`,
/// which is the same sum regrouped.
pub fn curvature_density_first(
    phi: &ScalarField,
    r: &VectorField,
    m: &MetricData,
    gamma_field: &ChristoffelField,
) -> Result<ScalarField> {
    let grid = phi.grid();
    grid.check_same(r.grid())?;
    grid.check_same(m.grid())?;
    grid.check_same(gamma_field.grid())?;
    let d = grid.dim();
    if r.codim() != d || m.dim() != d || gamma_field.dim() != d {
        return Err(Error::arg("field dimensions disagree"));
    }
    let dphi = gradient(phi, d)?;
    let values = exec::map_collect(grid.len(), |p| {
        let g = m.g(p);
        let ginv = m.g_inv(p);
        let f = phi.values()[p];
        let mut w = [Complex64::new(0.0, 0.0); MAX_DIM];
        for (a, wa) in w.iter_mut().enumerate().take(d) {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                let di = dphi[i].values()[p];
                acc += di * ginv[i * d + a];
                for j in 0..d {
                    acc += f * (ginv[i * d + j] * gamma_field.get(p, a, i, j));
                }
            }
            *wa = acc;
        }
        let mut rhat = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                rhat += w[a] * w[b].conj() * g[a * d + b];
            }
        }
        rhat
    });
    ScalarField::new(grid.clone(), values)
}

/// Normal-field curvature density with `b_ij = -∂(φ n)/∂x_j · g_i`,
/// `b^l_i = g^{lm} b_mi`, `R̂^i_jkl = b^l_i b*_jk`, `R̂_jk = R̂^i_jik` and
/// `R̂ = g^{jk} R̂_jk`, contracted in that index order.
pub fn curvature_density_normal(
    phi: &ScalarField,
    n: &VectorField,
    r: &VectorField,
    m: &MetricData,
) -> Result<ScalarField> {
    let grid = phi.grid();
    grid.check_same(n.grid())?;
    grid.check_same(r.grid())?;
    grid.check_same(m.grid())?;
    let d = grid.dim();
    if r.codim() != d || m.dim() != d {
        return Err(Error::arg("position field and metric must match the grid dimension"));
    }
    if n.codim() != r.codim() {
        return Err(Error::arg("normal field and position field codimensions differ"));
    }
    let basis = tangent_basis(r)?;
    let sig = m.signature();
    // composite ψ = φ n, differentiated componentwise
    let psi: Vec<Complex64> = (0..grid.len())
        .flat_map(|p| {
            let f = phi.values()[p];
            n.at(p).iter().map(move |&na| f * na).collect::<Vec<_>>()
        })
        .collect();
    let dpsi: Vec<Vec<Complex64>> = (0..d).map(|j| stencil::diff1(grid, &psi, d, j)).collect();
    let values = exec::map_collect(grid.len(), |p| {
        let ginv = m.g_inv(p);
        let mut b = [[Complex64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
        for (i, bi) in b.iter_mut().enumerate().take(d) {
            let gi = basis[i].at(p);
            for (j, bij) in bi.iter_mut().enumerate().take(d) {
                let dj = &dpsi[j][p * d..(p + 1) * d];
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    acc += dj[a] * (sig.weight(a) * gi[a]);
                }
                *bij = -acc;
            }
        }
        // b^l_i = g^{lm} b_mi
        let mut up = [[Complex64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
        for l in 0..d {
            for i in 0..d {
                up[l][i] = (0..d).map(|mm| b[mm][i] * ginv[l * d + mm]).sum();
            }
        }
        let mut rhat = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                // R̂_jk = Σ_i b^k_i b*_ji
                let rjk: Complex64 = (0..d).map(|i| up[k][i] * b[j][i].conj()).sum();
                rhat += rjk * ginv[j * d + k];
            }
        }
        rhat
    });
    ScalarField::new(grid.clone(), values)
}

/// Flat-limit reference density `Σ_k s_k |∂φ/∂x_k|²`, with `s_0 = -1` for the
/// Minkowski signature (the `-(1/c²)|∂φ/∂t|²` term when `x0 = c t`).
pub fn flat_density(phi: &ScalarField, signature: Signature) -> Result<ScalarField> {
    let d = phi.grid().dim();
    let dphi = gradient(phi, d)?;
    let values = exec::map_collect(phi.grid().len(), |p| {
        let s: f64 = (0..d)
            .map(|k| signature.weight(k) * dphi[k].values()[p].norm_sqr())
            .sum();
        Complex64::new(s, 0.0)
    });
    ScalarField::new(phi.grid().clone(), values)
}
