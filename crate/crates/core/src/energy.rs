//! Action functionals and equation residuals.
//!
//! Space-time grids store `x0 = c t` on axis 0; every time integral below
//! converts with `dt = dx0 / c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{
    christoffel, curvature_density_first, curvature_density_normal, metric, tangent_basis,
    MetricData, Signature,
};
use crate::grid::{stencil, Differentiable, Grid, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Mass (kg).
    pub m: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Curvature coupling (J m²).
    pub gamma: f64,
}

impl PhysicalConstants {
    pub fn new(m: f64, c: f64, hbar: f64, gamma: f64) -> Result<Self> {
        let k = PhysicalConstants { m, c, hbar, gamma };
        k.validate()?;
        Ok(k)
    }

    /// Constants with the quantum-mechanical coupling `γ = ħ²/m`.
    pub fn with_quantum_coupling(m: f64, c: f64, hbar: f64) -> Result<Self> {
        Self::new(m, c, hbar, hbar * hbar / m)
    }

    /// `m = c = ħ = γ = 1`.
    pub fn nondimensional() -> Self {
        PhysicalConstants {
            m: 1.0,
            c: 1.0,
            hbar: 1.0,
            gamma: 1.0,
        }
    }

    /// Electron mass, SI units, `γ = ħ²/m`.
    pub fn electron_si() -> Self {
        let m = 9.109_383_701_5e-31;
        let hbar = 1.054_571_817e-34;
        PhysicalConstants {
            m,
            c: 299_792_458.0,
            hbar,
            gamma: hbar * hbar / m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("c", self.c), ("hbar", self.hbar), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!("constant {name} = {v} must be finite and positive")));
            }
        }
        Ok(())
    }

    /// Rest energy `m c²`.
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }
}

/// Individually quadratured terms of an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// Kinetic (Newtonian, printed with a minus sign) or rest-energy term (relativistic).
    pub kinetic: f64,
    pub curvature: f64,
    /// Mass-constraint residual per time sample.
    pub constraint: Vec<f64>,
    pub multiplier_term: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic + self.curvature + self.multiplier_term
    }
}

/// Spatial components of a position field on a space-time grid: either the
/// trailing components of `(ct, X)` or the whole field when it only carries `X`.
pub fn spatial_components(r: &VectorField) -> Result<VectorField> {
    let g = r.grid();
    if !g.has_time_axis() {
        return Err(Error::arg("position field needs a space-time grid"));
    }
    let ns = g.dim() - 1;
    if r.codim() == g.dim() {
        r.select(1..r.codim())
    } else if r.codim() == ns {
        Ok(r.clone())
    } else {
        Err(Error::arg(format!(
            "position field codimension {} fits neither (ct, X) nor X on this grid",
            r.codim()
        )))
    }
}

pub struct Velocity {
    /// Pointwise speed `v = |∂X/∂t|` (real part).
    pub speed: ScalarField,
    /// `∂X/∂t` for the spatial components.
    pub dr_dt: VectorField,
}

/// Time derivative of the spatial components and the speed, rejecting `v >= c`.
pub fn velocity(r: &VectorField, consts: &PhysicalConstants) -> Result<Velocity> {
    consts.validate()?;
    let x = spatial_components(r)?;
    let dx0 = x.partial(0)?;
    let k = x.codim();
    let grid = x.grid().clone();
    let dr_dt = VectorField::new(grid.clone(), k, dx0.values().iter().map(|v| v * consts.c).collect())?;
    let speeds: Vec<f64> = (0..grid.len())
        .map(|p| dr_dt.at(p).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(p) = speeds.iter().position(|&v| !(v < consts.c)) {
        return Err(Error::Superluminal {
            point: grid.point_label(p),
            speed: speeds[p],
            c: consts.c,
        });
    }
    let speed = ScalarField::new(grid, speeds.into_iter().map(|v| Complex64::new(v, 0.0)).collect())?;
    Ok(Velocity { speed, dr_dt })
}

fn check_multiplier(e: &[f64], grid: &Grid) -> Result<()> {
    if e.len() != grid.time_samples() {
        return Err(Error::arg(format!(
            "multiplier has {} samples, grid has {} time samples",
            e.len(),
            grid.time_samples()
        )));
    }
    Ok(())
}

fn time_integral(grid: &Grid, per_slice: &[f64], c: f64) -> f64 {
    grid.time_weights()
        .iter()
        .zip(per_slice)
        .map(|(w, v)| w / c * v)
        .sum()
}

struct SliceTerms {
    kinetic: f64,
    curvature: f64,
    norm: f64,
}

fn euclidean_slices(
    r: &VectorField,
    phi: &ScalarField,
    consts: &PhysicalConstants,
    normal: Option<&VectorField>,
) -> Result<Vec<SliceTerms>> {
    let grid = phi.grid();
    grid.check_same(r.grid())?;
    let x = spatial_components(r)?;
    if x.codim() != grid.dim() - 1 {
        return Err(Error::arg("spatial position field must have one component per spatial axis"));
    }
    let vel = velocity(r, consts)?;
    let slice = grid.slice_len();
    (0..grid.time_samples())
        .map(|t| {
            let rt = x.time_slice(t)?;
            let ft = phi.time_slice(t)?;
            let basis = tangent_basis(&rt)?;
            let m = metric(&basis, Signature::Euclidean)?;
            let rhat = match normal {
                None => {
                    let gam = christoffel(&rt, &m)?;
                    curvature_density_first(&ft, &rt, &m, &gam)?
                }
                Some(n) => curvature_density_normal(&ft, &n.time_slice(t)?, &rt, &m)?,
            };
            let sg = rt.grid();
            let off = t * slice;
            let kinetic = sg.quadrature(|q| {
                let v2: f64 = vel.dr_dt.at(off + q).iter().map(|v| v * v).sum();
                consts.m * ft.values()[q].norm_sqr() * v2 * m.volume_weight(q)
            });
            let curvature = sg.quadrature(|q| rhat.values()[q].re * m.volume_weight(q));
            let norm = sg.quadrature(|q| ft.values()[q].norm_sqr() * m.volume_weight(q));
            Ok(SliceTerms {
                kinetic,
                curvature,
                norm,
            })
        })
        .collect()
}

fn assemble_newtonian(grid: &Grid, slices: &[SliceTerms], e: &[f64], consts: &PhysicalConstants) -> EnergyBreakdown {
    let c = consts.c;
    let kin: Vec<f64> = slices.iter().map(|s| s.kinetic).collect();
    let curv: Vec<f64> = slices.iter().map(|s| s.curvature).collect();
    let constraint: Vec<f64> = slices.iter().map(|s| s.norm - 1.0).collect();
    let mult: Vec<f64> = constraint.iter().zip(e).map(|(r, e)| e * r).collect();
    EnergyBreakdown {
        kinetic: -0.5 * time_integral(grid, &kin, c),
        curvature: 0.5 * consts.gamma * time_integral(grid, &curv, c),
        constraint,
        multiplier_term: -consts.m * time_integral(grid, &mult, c),
    }
}

/// Newtonian action with the Christoffel-expanded curvature energy:
///
/// `J = -½∫∫ m|φ|² ṙ·ṙ √g + (γ/2)∫∫ R̂ √g - m∫E(t)(∫|φ|²√g - 1)`.
///
/// `r` carries the spatial map `X(x, t)` (or `(ct, X)`); the metric is the
/// Euclidean Gram matrix of the spatial tangent basis on each time slice.
pub fn newtonian_action(
    r: &VectorField,
    phi: &ScalarField,
    e_multiplier: &[f64],
    consts: &PhysicalConstants,
) -> Result<EnergyBreakdown> {
    check_multiplier(e_multiplier, phi.grid())?;
    let slices = euclidean_slices(r, phi, consts, None)?;
    Ok(assemble_newtonian(phi.grid(), &slices, e_multiplier, consts))
}

/// The same functional with the normal-field curvature density in place of
/// the Christoffel expansion.
pub fn normal_field_action(
    r: &VectorField,
    n: &VectorField,
    phi: &ScalarField,
    e_multiplier: &[f64],
    consts: &PhysicalConstants,
) -> Result<EnergyBreakdown> {
    check_multiplier(e_multiplier, phi.grid())?;
    let x = spatial_components(r)?;
    if n.codim() != x.codim() {
        return Err(Error::arg("normal field must have the spatial codimension"));
    }
    let slices = euclidean_slices(r, phi, consts, Some(n))?;
    Ok(assemble_newtonian(phi.grid(), &slices, e_multiplier, consts))
}

/// Residuals of the pointwise constraints on the normal field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalConstraints {
    /// `max |n·n - 1|`.
    pub unit_norm: f64,
    /// `max |n·∂r/∂t|`.
    pub orthogonality: f64,
}

pub fn normal_constraints(r: &VectorField, n: &VectorField, consts: &PhysicalConstants) -> Result<NormalConstraints> {
    let vel = velocity(r, consts)?;
    n.grid().check_same(vel.dr_dt.grid())?;
    if n.codim() != vel.dr_dt.codim() {
        return Err(Error::arg("normal field must have the spatial codimension"));
    }
    let mut out = NormalConstraints {
        unit_norm: 0.0,
        orthogonality: 0.0,
    };
    for p in 0..n.grid().len() {
        let np = n.at(p);
        let nn: f64 = np.iter().map(|a| a * a).sum();
        let nv: f64 = np.iter().zip(vel.dr_dt.at(p)).map(|(a, b)| a * b).sum();
        out.unit_norm = out.unit_norm.max((nn - 1.0).abs());
        out.orthogonality = out.orthogonality.max(nv.abs());
    }
    Ok(out)
}

fn minkowski_frame(r: &VectorField) -> Result<MetricData> {
    let g = r.grid();
    if !g.has_time_axis() || r.codim() != g.dim() {
        return Err(Error::arg("relativistic position field must be (ct, X) on a space-time grid"));
    }
    metric(&tangent_basis(r)?, Signature::Minkowski)
}

/// Relativistic action
///
/// `J₁ = c²∫∫|R|²√(1-v²/c²)√(-g) + (γ/2)∫∫ R̂ √(-g)`,
///
/// with `R̂` the Christoffel-expanded density of `φ = R/√m` under the
/// Minkowski product. When `e_multiplier` is given the term
/// `-∫E(t)(∫|R|²√(-g) - m) dt` is added.
pub fn relativistic_action(
    r: &VectorField,
    big_r: &ScalarField,
    e_multiplier: Option<&[f64]>,
    consts: &PhysicalConstants,
) -> Result<EnergyBreakdown> {
    consts.validate()?;
    let grid = big_r.grid();
    grid.check_same(r.grid())?;
    let m = minkowski_frame(r)?;
    let vel = velocity(r, consts)?;
    let gam = christoffel(r, &m)?;
    let phi = big_r.scale(Complex64::new(1.0 / consts.m.sqrt(), 0.0));
    let rhat = curvature_density_first(&phi, r, &m, &gam)?;
    let c = consts.c;
    let rest = c * c
        * grid.quadrature(|p| {
            let v = vel.speed.values()[p].re;
            big_r.values()[p].norm_sqr() * (1.0 - v * v / (c * c)).sqrt() * m.volume_weight(p)
        })
        / c;
    let curvature = 0.5 * consts.gamma * grid.quadrature(|p| rhat.values()[p].re * m.volume_weight(p)) / c;
    let constraint = mass_constraint_residual(big_r, &m, consts)?;
    let multiplier_term = match e_multiplier {
        None => 0.0,
        Some(e) => {
            check_multiplier(e, grid)?;
            let v: Vec<f64> = constraint.iter().zip(e).map(|(r, e)| r * e).collect();
            -time_integral(grid, &v, c)
        }
    };
    Ok(EnergyBreakdown {
        kinetic: rest,
        curvature,
        constraint,
        multiplier_term,
    })
}

/// Mass differential density `|R|²/√(1-v²/c²) √|g|` of a relativistic position field.
pub fn mass_density(r: &VectorField, big_r: &ScalarField, consts: &PhysicalConstants) -> Result<ScalarField> {
    big_r.grid().check_same(r.grid())?;
    let m = minkowski_frame(r)?;
    let vel = velocity(r, consts)?;
    let c = consts.c;
    let vals = exec::map_collect(big_r.grid().len(), |p| {
        let v = vel.speed.values()[p].re;
        Complex64::new(
            big_r.values()[p].norm_sqr() / (1.0 - v * v / (c * c)).sqrt() * m.volume_weight(p),
            0.0,
        )
    });
    ScalarField::new(big_r.grid().clone(), vals)
}

/// `∫_Ω |R|² √|g| dx - m` for every time sample.
pub fn mass_constraint_residual(
    big_r: &ScalarField,
    m: &MetricData,
    consts: &PhysicalConstants,
) -> Result<Vec<f64>> {
    big_r.grid().check_same(m.grid())?;
    let masses = big_r
        .grid()
        .slice_quadrature(|p| big_r.values()[p].norm_sqr() * m.volume_weight(p));
    Ok(masses.into_iter().map(|v| v - consts.m).collect())
}

/// Free Schrödinger functional `(γ/2)Σ∫|∂φ/∂x_k|² - E(∫|φ|² - 1)` on a spatial grid.
pub fn reduced_schrodinger_energy(phi: &ScalarField, e: f64, consts: &PhysicalConstants) -> Result<f64> {
    let grid = phi.grid();
    let mut grad = 0.0;
    for k in grid.spatial_axes() {
        let d = phi.partial(k)?;
        grad += grid.quadrature(|p| d.values()[p].norm_sqr());
    }
    Ok(0.5 * consts.gamma * grad - e * (phi.norm_sq() - 1.0))
}

fn check_residual_grid(phi: &ScalarField) -> Result<()> {
    if !phi.grid().has_time_axis() {
        return Err(Error::arg("residuals need a space-time field"));
    }
    Ok(())
}

/// `(γ/2)(φ_tt/c² - Δφ) + mc²φ` on every interior space-time point.
fn kg_operator(phi: &ScalarField, consts: &PhysicalConstants) -> Vec<(usize, Complex64)> {
    let g = phi.grid();
    let d2t = stencil::diff2(g, phi.values(), 1, 0);
    let lap: Vec<Vec<Complex64>> = g.spatial_axes().map(|k| stencil::diff2(g, phi.values(), 1, k)).collect();
    let mc2 = consts.rest_energy();
    let interior: Vec<usize> = (0..g.len()).filter(|&p| g.is_interior_all(p)).collect();
    exec::map_collect(interior.len(), |q| {
        let p = interior[q];
        let lap_p: Complex64 = lap.iter().map(|l| l[p]).sum();
        (p, (d2t[p] - lap_p) * (0.5 * consts.gamma) + phi.values()[p] * mc2)
    })
}

fn residual_norm(grid: &Grid, field: &[Complex64], consts: &PhysicalConstants) -> f64 {
    let cell: f64 = grid.spatial_axes().map(|a| grid.spacing(a)).product::<f64>() * grid.spacing(0) / consts.c;
    (exec::sum(field.len(), |i| field[i].norm_sqr()) * cell).sqrt()
}

/// Pointwise Klein-Gordon residual
/// `(γ/2)(φ_tt/c² - Δφ) + mc²φ - E₁(t)φ` on interior space-time points,
/// in grid order. `e1` holds one value per time sample.
pub fn kg_residual_field(phi: &ScalarField, e1: &[f64], consts: &PhysicalConstants) -> Result<Vec<Complex64>> {
    consts.validate()?;
    check_residual_grid(phi)?;
    check_multiplier(e1, phi.grid())?;
    let g = phi.grid();
    Ok(kg_operator(phi, consts)
        .into_iter()
        .map(|(p, op)| op - phi.values()[p] * e1[g.multi_index(p)[0]])
        .collect())
}

/// Discrete `L²(Ω×[0,T])` norm of [`kg_residual_field`].
pub fn kg_residual(phi: &ScalarField, e1: &[f64], consts: &PhysicalConstants) -> Result<f64> {
    let f = kg_residual_field(phi, e1, consts)?;
    Ok(residual_norm(phi.grid(), &f, consts))
}

/// Pointwise Schrödinger-Klein-Gordon residual
/// `(γ/2)(φ_tt/c² - Δφ) + mc²φ - iħφ_t` on interior space-time points.
pub fn skg_residual_field(phi: &ScalarField, consts: &PhysicalConstants) -> Result<Vec<Complex64>> {
    consts.validate()?;
    check_residual_grid(phi)?;
    let g = phi.grid();
    let dt = stencil::diff1(g, phi.values(), 1, 0);
    let ihbar_c = Complex64::new(0.0, consts.hbar * consts.c);
    Ok(kg_operator(phi, consts)
        .into_iter()
        .map(|(p, op)| op - dt[p] * ihbar_c)
        .collect())
}

pub fn skg_residual(phi: &ScalarField, consts: &PhysicalConstants) -> Result<f64> {
    let f = skg_residual_field(phi, consts)?;
    Ok(residual_norm(phi.grid(), &f, consts))
}

/// The energy that the central time difference assigns to the phase
/// `e^{-iE₁t/ħ}`: `iħ D_t φ = ħ sin(E₁ Δt/ħ)/Δt · φ` exactly at interior points.
pub fn discrete_phase_energy(e1: f64, grid: &Grid, consts: &PhysicalConstants) -> Result<f64> {
    if !grid.has_time_axis() {
        return Err(Error::arg("need a space-time grid"));
    }
    let dt = grid.spacing(0) / consts.c;
    Ok(consts.hbar * (e1 * dt / consts.hbar).sin() / dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_must_be_positive() {
        assert!(PhysicalConstants::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        let k = PhysicalConstants::with_quantum_coupling(2.0, 1.0, 3.0).unwrap();
        assert!((k.gamma - 4.5).abs() < 1e-15);
        let si = PhysicalConstants::electron_si();
        assert!((si.gamma - si.hbar * si.hbar / si.m).abs() <= 1e-15 * si.gamma);
    }

    #[test]
    fn static_and_translating_velocity() {
        let k = PhysicalConstants::nondimensional();
        let s = Grid::unit_cube(3, 4).unwrap();
        let g = Grid::space_time(0.0, 1.0, 5, &s).unwrap();
        let r = VectorField::identity(&g);
        let v = velocity(&r, &k).unwrap();
        assert!(v.speed.max_abs() < 1e-14);

        let u = 0.6;
        let r = VectorField::from_fn(&g, 4, |x, o| {
            o[0] = x[0];
            o[1] = x[1] + u * x[0];
            o[2] = x[2];
            o[3] = x[3];
        })
        .unwrap();
        let v = velocity(&r, &k).unwrap();
        assert!(v.speed.values().iter().all(|z| (z.re - u).abs() < 1e-12));

        let fast = VectorField::from_fn(&g, 3, |x, o| {
            o[0] = x[1] + 1.2 * x[0];
            o[1] = x[2];
            o[2] = x[3];
        })
        .unwrap();
        assert!(matches!(velocity(&fast, &k), Err(Error::Superluminal { .. })));
    }

    #[test]
    fn zero_fields_have_zero_residuals() {
        let k = PhysicalConstants::nondimensional();
        let s = Grid::unit_cube(3, 5).unwrap();
        let g = Grid::space_time(0.0, 1.0, 5, &s).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(kg_residual(&z, &[1.0; 5], &k).unwrap(), 0.0);
        assert_eq!(skg_residual(&z, &k).unwrap(), 0.0);
        assert!(kg_residual(&z, &[1.0; 4], &k).is_err());
        assert!(skg_residual(&ScalarField::zeros(&s), &k).is_err());
    }
}
