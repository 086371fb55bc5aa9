use std::f64::consts::PI;

use kgvar::geometry::{
    christoffel, curvature_density_first, curvature_density_normal, flat_density, metric,
    tangent_basis, ChristoffelField, MetricData, Signature,
};
use kgvar::grid::{partial, Grid, ScalarField, VectorField};
use kgvar::Complex64;

fn polar_grid(n: usize) -> Grid {
    Grid::new(&[0.5, 0.0], &[1.5, 1.0], &[n, n]).unwrap()
}

fn polar(n: usize) -> VectorField {
    VectorField::from_fn(&polar_grid(n), 2, |u, o| {
        o[0] = u[0] * u[1].cos();
        o[1] = u[0] * u[1].sin();
    })
    .unwrap()
}

fn spherical(n: usize) -> VectorField {
    let g = Grid::new(&[1.0, 0.7, 0.0], &[1.5, 1.2, 0.5], &[n, n, n]).unwrap();
    VectorField::from_fn(&g, 3, |u, o| {
        let (rho, th, ph) = (u[0], u[1], u[2]);
        o[0] = rho * th.sin() * ph.cos();
        o[1] = rho * th.sin() * ph.sin();
        o[2] = rho * th.cos();
    })
    .unwrap()
}

fn polar_gamma(u: &[f64], s: usize, i: usize, j: usize) -> f64 {
    match (s, i, j) {
        (0, 1, 1) => -u[0],
        (1, 0, 1) | (1, 1, 0) => 1.0 / u[0],
        _ => 0.0,
    }
}

fn spherical_gamma(u: &[f64], s: usize, i: usize, j: usize) -> f64 {
    let (rho, th) = (u[0], u[1]);
    let (a, b) = (i.min(j), i.max(j));
    match (s, a, b) {
        (0, 1, 1) => -rho,
        (0, 2, 2) => -rho * th.sin().powi(2),
        (1, 0, 1) => 1.0 / rho,
        (1, 2, 2) => -th.sin() * th.cos(),
        (2, 0, 2) => 1.0 / rho,
        (2, 1, 2) => th.cos() / th.sin(),
        _ => 0.0,
    }
}

fn gamma_interior_error(r: &VectorField, exact: fn(&[f64], usize, usize, usize) -> f64) -> f64 {
    let basis = tangent_basis(r).unwrap();
    let m = metric(&basis, Signature::Euclidean).unwrap();
    let gam = christoffel(r, &m).unwrap();
    let g = r.grid();
    let d = g.dim();
    let mut err: f64 = 0.0;
    for p in (0..g.len()).filter(|&p| g.is_interior_all(p)) {
        let u = &g.coords(p)[..d];
        for s in 0..d {
            for i in 0..d {
                for j in 0..d {
                    err = err.max((gam.get(p, s, i, j) - exact(u, s, i, j)).abs());
                }
            }
        }
    }
    err
}

fn order(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (coarse / fine).ln() / (h_coarse / h_fine).ln()
}

#[test]
fn identity_and_scaled_tangent_basis() {
    let g = Grid::unit_cube(3, 5).unwrap();
    let id = VectorField::identity(&g);
    let b = tangent_basis(&id).unwrap();
    let twice = VectorField::from_fn(&g, 3, |x, o| {
        for a in 0..3 {
            o[a] = 2.0 * x[a];
        }
    })
    .unwrap();
    let b2 = tangent_basis(&twice).unwrap();
    for p in 0..g.len() {
        for k in 0..3 {
            for a in 0..3 {
                let e = if a == k { 1.0 } else { 0.0 };
                assert!((b[k].at(p)[a] - e).abs() < 1e-12);
                assert!((b2[k].at(p)[a] - 2.0 * e).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn polar_tangent_basis_and_metric_converge() {
    let errs: Vec<(f64, f64, f64)> = [17, 33, 65]
        .iter()
        .map(|&n| {
            let r = polar(n);
            let g = r.grid().clone();
            let b = tangent_basis(&r).unwrap();
            let m = metric(&b, Signature::Euclidean).unwrap();
            let (mut eb, mut em) = (0.0f64, 0.0f64);
            for p in 0..g.len() {
                let u = g.coords(p);
                let g1 = [u[1].cos(), u[1].sin()];
                let g2 = [-u[0] * u[1].sin(), u[0] * u[1].cos()];
                for a in 0..2 {
                    eb = eb.max((b[0].at(p)[a] - g1[a]).abs());
                    eb = eb.max((b[1].at(p)[a] - g2[a]).abs());
                }
                em = em.max((m.det(p) - u[0] * u[0]).abs());
                em = em.max((m.g(p)[3] - u[0] * u[0]).abs());
                em = em.max(m.g(p)[1].abs());
            }
            (g.spacing(0), eb, em)
        })
        .collect();
    for w in errs.windows(2) {
        assert!(order(w[0].1, w[1].1, w[0].0, w[1].0) >= 1.9);
        assert!(order(w[0].2, w[1].2, w[0].0, w[1].0) >= 1.9);
    }
}

#[test]
fn metric_identities_hold_per_point() {
    let r = spherical(9);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    for p in 0..r.grid().len() {
        let (g, gi) = (m.g(p), m.g_inv(p));
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[i * 3 + j] - g[j * 3 + i]).abs() < 1e-12);
                let s: f64 = (0..3).map(|k| g[i * 3 + k] * gi[k * 3 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(m.det(p) > 0.0);
    }
}

#[test]
fn flat_spacetime_metric() {
    let s = Grid::unit_cube(3, 4).unwrap();
    let g = Grid::space_time(0.0, 1.0, 4, &s).unwrap();
    let r = VectorField::identity(&g);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Minkowski).unwrap();
    for p in 0..g.len() {
        assert!((m.det(p) + 1.0).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i != j { 0.0 } else if i == 0 { -1.0 } else { 1.0 };
                assert!((m.g(p)[i * 4 + j] - e).abs() < 1e-12);
                assert!((m.g_inv(p)[i * 4 + j] - e).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn polar_christoffel_converges() {
    let hs: Vec<f64> = [9, 17, 33].iter().map(|&n| polar_grid(n).spacing(0)).collect();
    let es: Vec<f64> = [9, 17, 33].iter().map(|&n| gamma_interior_error(&polar(n), polar_gamma)).collect();
    assert!(es[2] < 1e-3);
    for k in 0..2 {
        assert!(order(es[k], es[k + 1], hs[k], hs[k + 1]) >= 1.9, "{es:?}");
    }
}

#[test]
fn spherical_christoffel_converges() {
    let es: Vec<f64> = [9, 17, 33].iter().map(|&n| gamma_interior_error(&spherical(n), spherical_gamma)).collect();
    assert!(order(es[0], es[1], 2.0, 1.0) >= 1.9, "{es:?}");
    assert!(order(es[1], es[2], 2.0, 1.0) >= 1.9, "{es:?}");
}

#[test]
fn christoffel_symmetric_in_lower_indices() {
    let r = spherical(7);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let gam = christoffel(&r, &m).unwrap();
    for p in 0..r.grid().len() {
        for s in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((gam.get(p, s, i, j) - gam.get(p, s, j, i)).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn affine_maps_have_vanishing_christoffel() {
    let g = Grid::new(&[-1.0, 0.0, 2.0], &[1.0, 3.0, 2.5], &[6, 7, 5]).unwrap();
    let a = [[2.0, 0.3, -0.1], [0.2, 1.5, 0.4], [-0.3, 0.1, 0.9]];
    let r = VectorField::from_fn(&g, 3, |x, o| {
        for i in 0..3 {
            o[i] = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() + i as f64;
        }
    })
    .unwrap();
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    assert!(christoffel(&r, &m).unwrap().max_abs() <= 1e-8);
    let id = VectorField::identity(&g);
    let m = metric(&tangent_basis(&id).unwrap(), Signature::Euclidean).unwrap();
    assert!(christoffel(&id, &m).unwrap().max_abs() <= 1e-8);
}

#[test]
fn christoffel_reconstructs_second_derivatives() {
    let err = |n: usize| {
        let r = polar(n);
        let g = r.grid().clone();
        let b = tangent_basis(&r).unwrap();
        let m = metric(&b, Signature::Euclidean).unwrap();
        let gam = christoffel(&r, &m).unwrap();
        let mut e: f64 = 0.0;
        for p in (0..g.len()).filter(|&p| g.is_interior_all(p)) {
            let u = g.coords(p);
            // analytic ∂²r
            let d2 = |i: usize, j: usize| -> [f64; 2] {
                match (i, j) {
                    (0, 0) => [0.0, 0.0],
                    (1, 1) => [-u[0] * u[1].cos(), -u[0] * u[1].sin()],
                    _ => [-u[1].sin(), u[1].cos()],
                }
            };
            for i in 0..2 {
                for j in 0..2 {
                    let exact = d2(i, j);
                    for a in 0..2 {
                        let rec: f64 = (0..2).map(|s| gam.get(p, s, i, j) * b[s].at(p)[a]).sum();
                        e = e.max((rec - exact[a]).abs());
                    }
                }
            }
        }
        (g.spacing(0), e)
    };
    let (a, b) = (err(17), err(33));
    assert!(order(a.1, b.1, a.0, b.0) >= 1.9);
}

fn smooth_phi(g: &Grid) -> ScalarField {
    ScalarField::from_fn(g, |x| {
        let s: f64 = x.iter().enumerate().map(|(k, v)| (k as f64 + 1.0) * v).sum();
        let amp: f64 = x.iter().map(|v| (PI * v).sin() + 0.3).product();
        Complex64::from_polar(amp, 0.7 * s)
    })
}

/// Six-index sum with each term carrying its own index set, as in the
/// expansion of the product of the two composite derivatives.
fn first_form_literal(
    phi: &ScalarField,
    m: &MetricData,
    gam: &ChristoffelField,
) -> Vec<Complex64> {
    let g = phi.grid();
    let d = g.dim();
    let dphi: Vec<ScalarField> = (0..d).map(|k| partial(phi, k).unwrap()).collect();
    (0..g.len())
        .map(|p| {
            let (gm, gi) = (m.g(p), m.g_inv(p));
            let f = phi.values()[p];
            let fc = f.conj();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let w = gi[i * d + j] * gi[k * d + l];
                            let di = dphi[i].values()[p];
                            let dkc = dphi[k].values()[p].conj();
                            let mut t = di * dkc * gm[j * d + l];
                            for s in 0..d {
                                t += f * dkc * gam.get(p, s, i, j) * gm[s * d + l];
                            }
                            for q in 0..d {
                                t += fc * di * gam.get(p, q, k, l) * gm[q * d + j];
                            }
                            for s in 0..d {
                                for q in 0..d {
                                    t += f * fc * gam.get(p, s, i, j) * gam.get(p, q, k, l) * gm[s * d + q];
                                }
                            }
                            acc += t * w;
                        }
                    }
                }
            }
            acc
        })
        .collect()
}

#[test]
fn first_form_matches_literal_sum_on_curved_embedding() {
    let r = spherical(7);
    let g = r.grid().clone();
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let gam = christoffel(&r, &m).unwrap();
    let phi = smooth_phi(&g);
    let fast = curvature_density_first(&phi, &r, &m, &gam).unwrap();
    let slow = first_form_literal(&phi, &m, &gam);
    let scale = slow.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in fast.values().iter().zip(&slow) {
        assert!((a - b).norm() <= 1e-11 * scale);
        assert!(a.im.abs() <= 1e-10 * scale);
    }
}

#[test]
fn first_form_flat_euclidean_reduction() {
    let g = Grid::unit_cube(3, 9).unwrap();
    let r = VectorField::identity(&g);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let gam = christoffel(&r, &m).unwrap();
    let phi = smooth_phi(&g);
    let rhat = curvature_density_first(&phi, &r, &m, &gam).unwrap();
    let flat = flat_density(&phi, Signature::Euclidean).unwrap();
    assert!(rhat.max_abs_diff(&flat).unwrap() <= 1e-10);

    let c = ScalarField::from_fn(&g, |_| Complex64::new(0.3, -0.2));
    assert!(curvature_density_first(&c, &r, &m, &gam).unwrap().max_abs() <= 1e-10);
}

#[test]
fn first_form_flat_minkowski_reduction() {
    // nondimensional c = 1: x0 = t
    let s = Grid::unit_cube(3, 6).unwrap();
    let g = Grid::space_time(0.0, 1.0, 6, &s).unwrap();
    let r = VectorField::identity(&g);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Minkowski).unwrap();
    let gam = christoffel(&r, &m).unwrap();
    let phi = smooth_phi(&g);
    let rhat = curvature_density_first(&phi, &r, &m, &gam).unwrap();
    let dphi: Vec<ScalarField> = (0..4).map(|k| partial(&phi, k).unwrap()).collect();
    for p in 0..g.len() {
        let expected = -dphi[0].values()[p].norm_sqr()
            + (1..4).map(|k| dphi[k].values()[p].norm_sqr()).sum::<f64>();
        assert!((rhat.values()[p].re - expected).abs() <= 1e-10);
        assert!(rhat.values()[p].im.abs() <= 1e-10);
    }
}

#[test]
fn normal_form_flat_reduction() {
    let g = Grid::unit_cube(3, 8).unwrap();
    let r = VectorField::identity(&g);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let c = [0.48, 0.6, 0.64];
    let n = VectorField::from_fn(&g, 3, |_, o| o.copy_from_slice(&c)).unwrap();
    let phi = smooth_phi(&g);
    let rhat = curvature_density_normal(&phi, &n, &r, &m).unwrap();
    let flat = flat_density(&phi, Signature::Euclidean).unwrap();
    assert!(rhat.max_abs_diff(&flat).unwrap() <= 1e-10);

    let k = ScalarField::from_fn(&g, |_| Complex64::new(1.0, 1.0));
    assert!(curvature_density_normal(&k, &n, &r, &m).unwrap().max_abs() <= 1e-10);
}

/// Independent loop nest: builds b_ij, the full R̂^i_jkl tensor, then contracts.
fn normal_form_literal(phi: &ScalarField, n: &VectorField, r: &VectorField, m: &MetricData) -> Vec<Complex64> {
    let g = phi.grid();
    let d = g.dim();
    let sig = m.signature();
    let basis = tangent_basis(r).unwrap();
    let comps: Vec<ScalarField> = (0..d)
        .map(|a| {
            let vals = (0..g.len()).map(|p| phi.values()[p] * n.at(p)[a]).collect();
            ScalarField::new(g.clone(), vals).unwrap()
        })
        .collect();
    let dcomp: Vec<Vec<ScalarField>> = (0..d)
        .map(|j| comps.iter().map(|c| partial(c, j).unwrap()).collect())
        .collect();
    (0..g.len())
        .map(|p| {
            let gi = m.g_inv(p);
            let eta = |a: usize| if sig == Signature::Minkowski && a == 0 { -1.0 } else { 1.0 };
            let b = |i: usize, j: usize| -> Complex64 {
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    s += dcomp[j][a].values()[p] * (eta(a) * basis[i].at(p)[a]);
                }
                -s
            };
            let b_up = |l: usize, i: usize| -> Complex64 {
                (0..d).map(|q| b(q, i) * gi[l * d + q]).sum()
            };
            // R̂^i_{jkl} = b^l_i b*_jk
            let riem = |i: usize, j: usize, k: usize, l: usize| b_up(l, i) * b(j, k).conj();
            let mut total = Complex64::new(0.0, 0.0);
            for j in 0..d {
                for k in 0..d {
                    let mut ric = Complex64::new(0.0, 0.0);
                    for i in 0..d {
                        ric += riem(i, j, i, k);
                    }
                    total += ric * gi[j * d + k];
                }
            }
            total
        })
        .collect()
}

#[test]
fn normal_form_matches_brute_force_2d() {
    let g = Grid::unit_cube(2, 9).unwrap();
    let r = VectorField::identity(&g);
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let n = VectorField::from_fn(&g, 2, |x, o| {
        let alpha = 1.3 * x[0] + 0.4 * (PI * x[1]).sin();
        o[0] = alpha.cos();
        o[1] = alpha.sin();
    })
    .unwrap();
    let phi = ScalarField::from_real_fn(&g, |_| 1.0);
    let fast = curvature_density_normal(&phi, &n, &r, &m).unwrap();
    let slow = normal_form_literal(&phi, &n, &r, &m);
    for (a, b) in fast.values().iter().zip(&slow) {
        assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
    }
    assert!(fast.max_abs() > 0.1);
}

#[test]
fn normal_form_matches_brute_force_curved_minkowski() {
    let s = Grid::new(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[5, 5, 5]).unwrap();
    let g = Grid::space_time(0.0, 1.0, 5, &s).unwrap();
    let r = VectorField::from_fn(&g, 4, |x, o| {
        o[0] = x[0];
        o[1] = x[1] + 0.1 * x[0] * x[2];
        o[2] = x[2] + 0.05 * (x[1] * x[3]);
        o[3] = x[3] + 0.1 * x[1].powi(2);
    })
    .unwrap();
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Minkowski).unwrap();
    let n = VectorField::from_fn(&g, 4, |x, o| {
        let a = 0.5 * x[1] + 0.3 * x[0];
        o[0] = 0.0;
        o[1] = a.cos();
        o[2] = a.sin();
        o[3] = 0.0;
    })
    .unwrap();
    let phi = smooth_phi(&g);
    let fast = curvature_density_normal(&phi, &n, &r, &m).unwrap();
    let slow = normal_form_literal(&phi, &n, &r, &m);
    let scale = slow.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in fast.values().iter().zip(&slow) {
        assert!((a - b).norm() <= 1e-11 * scale);
        assert!(a.im.abs() <= 1e-10 * scale);
    }
}

#[test]
fn densities_are_phase_invariant() {
    let r = spherical(6);
    let g = r.grid().clone();
    let m = metric(&tangent_basis(&r).unwrap(), Signature::Euclidean).unwrap();
    let gam = christoffel(&r, &m).unwrap();
    let n = VectorField::from_fn(&g, 3, |x, o| {
        let a = x[2];
        o[0] = a.cos();
        o[1] = a.sin();
        o[2] = 0.0;
    })
    .unwrap();
    let phi = smooth_phi(&g);
    let rot = phi.scale(Complex64::from_polar(1.0, 1.234));
    let a = curvature_density_first(&phi, &r, &m, &gam).unwrap();
    let b = curvature_density_first(&rot, &r, &m, &gam).unwrap();
    let scale = a.max_abs();
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * scale);
    let a = curvature_density_normal(&phi, &n, &r, &m).unwrap();
    let b = curvature_density_normal(&rot, &n, &r, &m).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * a.max_abs());
}
