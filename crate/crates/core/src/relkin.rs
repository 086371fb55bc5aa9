//! Special-relativistic kinematics: the boost without rotation, the
//! Minkowski product, and the `J = L + S` decomposition of the angular
//! momentum of a sampled wave function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{spatial_components, velocity, PhysicalConstants};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{stencil, Grid, ScalarField, VectorField, MAX_DIM};
use crate::linalg::Lu;

/// Below this `|v|/c` the boost factor uses its Taylor expansion.
pub const SERIES_BRANCH: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Time (s).
    pub t: f64,
    /// Position (m).
    pub x: [f64; 3],
}

impl Event {
    pub fn new(t: f64, x: [f64; 3]) -> Result<Self> {
        if !(t.is_finite() && x.iter().all(|v| v.is_finite())) {
            return Err(Error::arg("event components must be finite"));
        }
        Ok(Event { t, x })
    }

    /// `c²t² - |x|²`.
    pub fn interval(&self, c: f64) -> f64 {
        let ct = c * self.t;
        ct * ct - self.x.iter().map(|v| v * v).sum::<f64>()
    }

    /// `(ct, x)`.
    pub fn four_vector(&self, c: f64) -> [f64; 4] {
        [c * self.t, self.x[0], self.x[1], self.x[2]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostVelocity {
    v: [f64; 3],
}

impl BoostVelocity {
    pub fn new(v: [f64; 3], consts: &PhysicalConstants) -> Result<Self> {
        let speed = norm3(&v);
        if !speed.is_finite() || speed >= consts.c {
            return Err(Error::arg(format!("boost speed {speed:e} must be below c = {:e}", consts.c)));
        }
        Ok(BoostVelocity { v })
    }

    pub fn v(&self) -> [f64; 3] {
        self.v
    }

    pub fn speed(&self) -> f64 {
        norm3(&self.v)
    }

    pub fn reversed(&self) -> Self {
        BoostVelocity {
            v: [-self.v[0], -self.v[1], -self.v[2]],
        }
    }
}

fn norm3(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `1/√(1 - v²/c²)`.
pub fn lorentz_factor(speed: f64, c: f64) -> f64 {
    let b = speed / c;
    1.0 / ((1.0 - b) * (1.0 + b)).sqrt()
}

/// `(1/√(1 - v²/c²) - 1)/v²`, finite at `v = 0`.
pub fn boost_factor(speed: f64, c: f64) -> f64 {
    let b = speed / c;
    if b < SERIES_BRANCH {
        (1.0 + 0.75 * b * b) / (2.0 * c * c)
    } else {
        let g = lorentz_factor(speed, c);
        g / (c * c * (1.0 + ((1.0 - b) * (1.0 + b)).sqrt()))
    }
}

/// Coordinates of `e` in the frame moving with velocity `v`:
///
/// `x' = x + f (x·v) v - γ t v`, `t' = γ (t - x·v/c²)`, `f = (γ - 1)/v²`.
pub fn boost(e: &Event, v: &BoostVelocity, consts: &PhysicalConstants) -> Event {
    let (t, x) = boost_parts(e.t, &e.x, &v.v, consts.c);
    Event { t, x }
}

fn boost_parts(t: f64, x: &[f64], v: &[f64], c: f64) -> (f64, [f64; 3]) {
    let speed = norm3(v);
    let g = lorentz_factor(speed, c);
    let f = boost_factor(speed, c);
    let xv = dot3(x, v);
    let mut out = [0.0; 3];
    for j in 0..3 {
        out[j] = x[j] + f * xv * v[j] - g * t * v[j];
    }
    (g * (t - xv / (c * c)), out)
}

/// `-y₀z₀ + y₁z₁ + y₂z₂ + y₃z₃`.
pub fn minkowski_dot(y: &[f64; 4], z: &[f64; 4]) -> f64 {
    -y[0] * z[0] + y[1] * z[1] + y[2] * z[2] + y[3] * z[3]
}

/// Rotation axis of the infinitesimal generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Generator `w(x)` with `r_ε = r + ε w`: `z → (-x₂, x₁, 0)` and cyclic.
    pub fn generator(self, x: &[f64]) -> [f64; 3] {
        match self {
            Axis::X => [0.0, -x[2], x[1]],
            Axis::Y => [x[2], 0.0, -x[0]],
            Axis::Z => [-x[1], x[0], 0.0],
        }
    }
}

/// `J`, `L` and `S` applied to a field, one value per grid point.
#[derive(Clone, Debug)]
pub struct AngularDecomposition {
    pub axis: Axis,
    pub j: ScalarField,
    pub l: ScalarField,
    pub s: ScalarField,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionNorms {
    pub j: f64,
    pub l: f64,
    pub s: f64,
    /// `max |J - (L + S)|`.
    pub identity_defect: f64,
}

impl AngularDecomposition {
    /// Discrete `L²` norms over the space-time grid.
    pub fn norms(&self) -> DecompositionNorms {
        let defect = (0..self.j.values().len())
            .map(|p| (self.j.values()[p] - self.l.values()[p] - self.s.values()[p]).norm())
            .fold(0.0, f64::max);
        DecompositionNorms {
            j: self.j.norm_sq().sqrt(),
            l: self.l.norm_sq().sqrt(),
            s: self.s.norm_sq().sqrt(),
            identity_defect: defect,
        }
    }
}

/// Primed coordinates `(ct', X')` of every point of a position field under
/// the boost with its own local velocity.
pub fn primed_coordinates(r: &VectorField, consts: &PhysicalConstants) -> Result<VectorField> {
    let vel = velocity(r, consts)?;
    let x = spatial_components(r)?;
    if x.codim() != 3 {
        return Err(Error::arg("position field needs three spatial components"));
    }
    let grid = x.grid().clone();
    let c = consts.c;
    let vals: Vec<[f64; 4]> = exec::map_collect(grid.len(), |p| {
        let t = grid.coords(p)[0] / c;
        let (tp, xp) = boost_parts(t, x.at(p), vel.dr_dt.at(p), c);
        [c * tp, xp[0], xp[1], xp[2]]
    });
    VectorField::new(grid, 4, vals.into_iter().flatten().collect())
}

/// Splits the angular momentum about `axis` of `φ(X', t')`, sampled at the
/// material points `(x₀, x)` of `r`, into orbital and spin parts.
///
/// Derivatives with respect to `(t', X')` come from the chain rule through
/// the 4x4 Jacobian of `(x₀, x) ↦ (ct', X')`. With `w` the generator,
///
/// * `L = -iħ w·∇_{X'}φ`,
/// * `S = -iħ f (w·v) v·∇_{X'}φ + iħ γ (w·v)/c² ∂φ/∂t'`,
/// * `J = -iħ (∂X'_ε/∂ε·∇_{X'}φ + ∂t'_ε/∂ε ∂φ/∂t')`, evaluated separately.
pub fn angular_decompose(
    phi: &ScalarField,
    r: &VectorField,
    axis: Axis,
    consts: &PhysicalConstants,
) -> Result<AngularDecomposition> {
    consts.validate()?;
    let grid = phi.grid();
    grid.check_same(r.grid())?;
    if !grid.has_time_axis() || grid.dim() != 4 {
        return Err(Error::arg("angular decomposition needs a (t, x1, x2, x3) grid"));
    }
    let vel = velocity(r, consts)?;
    let primed = primed_coordinates(r, consts)?;
    let jac: Vec<Vec<f64>> = (0..4).map(|a| stencil::diff1(grid, primed.values(), 4, a)).collect();
    let grad: Vec<Vec<Complex64>> = (0..4).map(|a| stencil::diff1(grid, phi.values(), 1, a)).collect();
    let c = consts.c;
    let hbar = consts.hbar;
    let minus_i_hbar = Complex64::new(0.0, -hbar);

    let per_point: Vec<Result<[Complex64; 3]>> = exec::map_collect(grid.len(), |p| {
        // jt[a][b] = ∂Y_b/∂q_a, so ∇_q φ = jt · ∇_Y φ
        let mut jt = [[0.0; MAX_DIM]; MAX_DIM];
        for (a, row) in jt.iter_mut().enumerate() {
            row.copy_from_slice(&jac[a][4 * p..4 * p + 4]);
        }
        let lu = Lu::new(&jt, 4);
        if lu.is_singular(1e-12) {
            return Err(Error::SingularJacobian {
                point: grid.point_label(p),
            });
        }
        let re = lu.solve(&[grad[0][p].re, grad[1][p].re, grad[2][p].re, grad[3][p].re]);
        let im = lu.solve(&[grad[0][p].im, grad[1][p].im, grad[2][p].im, grad[3][p].im]);
        let dy: Vec<Complex64> = (0..4).map(|b| Complex64::new(re[b], im[b])).collect();
        let dphi_dt = dy[0] * c;
        let dphi_dx = &dy[1..];

        let x = grid.coords(p);
        let w = axis.generator(&x[1..4]);
        let v = vel.dr_dt.at(p);
        let speed = norm3(v);
        let g = lorentz_factor(speed, c);
        let f = boost_factor(speed, c);
        let wv = dot3(&w, v);

        let l: Complex64 = (0..3).map(|j| dphi_dx[j] * w[j]).sum::<Complex64>() * minus_i_hbar;
        let s_x: Complex64 = (0..3).map(|j| dphi_dx[j] * v[j]).sum::<Complex64>() * (f * wv);
        let s = s_x * minus_i_hbar - dphi_dt * (g * wv / (c * c)) * minus_i_hbar;
        let dt_de = -g * wv / (c * c);
        let jz = ((0..3).map(|j| dphi_dx[j] * (f * wv * v[j] + w[j])).sum::<Complex64>() + dphi_dt * dt_de)
            * minus_i_hbar;
        Ok([jz, l, s])
    });
    let mut jv = Vec::with_capacity(grid.len());
    let mut lv = Vec::with_capacity(grid.len());
    let mut sv = Vec::with_capacity(grid.len());
    for item in per_point {
        let [a, b, c] = item?;
        jv.push(a);
        lv.push(b);
        sv.push(c);
    }
    Ok(AngularDecomposition {
        axis,
        j: ScalarField::new(grid.clone(), jv)?,
        l: ScalarField::new(grid.clone(), lv)?,
        s: ScalarField::new(grid.clone(), sv)?,
    })
}

/// [`angular_decompose`] about the z axis.
pub fn angular_decompose_z(
    phi: &ScalarField,
    r: &VectorField,
    consts: &PhysicalConstants,
) -> Result<AngularDecomposition> {
    angular_decompose(phi, r, Axis::Z, consts)
}

/// Space-time grid helper for spin checks: `[0, T] × box`.
pub fn spin_grid(duration: f64, nt: usize, spatial: &Grid, consts: &PhysicalConstants) -> Result<Grid> {
    if spatial.dim() != 3 || spatial.has_time_axis() {
        return Err(Error::arg("spin checks need a three-dimensional spatial grid"));
    }
    Grid::with_duration(duration, nt, consts.c, spatial)
}
