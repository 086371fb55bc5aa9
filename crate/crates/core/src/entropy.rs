//! Sublevel measure `W(E)`, entropy `S(E)` and inverse temperature of an
//! energy profile `E(x, t) = E₁(x, t) - μ|φ(x)|²`.
//!
//! The indicator of `{E(x, t) ≤ Ê}` is sampled pointwise with trapezoid
//! weights, so `W` is a step function of `Ê` and accurate to first order at
//! level-set crossings. `W` is divided by the discrete measure of the whole
//! domain, which equals 1 up to the normalization tolerance of `φ`, so the
//! full sublevel set has `W = 1` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, ScalarField};

/// Tolerance on `∫|φ|² dx = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EnergyProfile {
    e_field: Vec<f64>,
    total: f64,
    grid: Grid,
    phi: ScalarField,
    mu: f64,
}

impl EnergyProfile {
    /// Builds `E = E₁ - μ|φ|²` from a space-time `E₁` (real part used) and a
    /// normalized spatial `φ`.
    pub fn new(e1: &ScalarField, phi: &ScalarField, mu: f64) -> Result<Self> {
        let grid = e1.grid();
        if !grid.has_time_axis() {
            return Err(Error::arg("energy profile needs a space-time grid"));
        }
        if phi.grid() != &grid.spatial() {
            return Err(Error::GridMismatch);
        }
        if !mu.is_finite() {
            return Err(Error::arg("mu must be finite"));
        }
        let norm = phi.norm_sq();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::arg(format!("∫|φ|² dx = {norm}, expected 1 within {NORMALIZATION_TOL:e}")));
        }
        let slice = grid.slice_len();
        let e_field: Vec<f64> = exec::map_collect(grid.len(), |p| {
            e1.values()[p].re - mu * phi.values()[p % slice].norm_sqr()
        });
        if e_field.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("energy profile has non-finite values"));
        }
        let mut profile = EnergyProfile {
            e_field,
            total: 1.0,
            grid: grid.clone(),
            phi: phi.clone(),
            mu,
        };
        let tw = profile.grid.time_weights();
        profile.total = exec::sum(profile.e_field.len(), |p| profile.weight(p, &tw));
        Ok(profile)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn e_field(&self) -> &[f64] {
        &self.e_field
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `(min E, max E)`.
    pub fn range(&self) -> (f64, f64) {
        self.e_field
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Quadrature weight of point `p` in `∫∫ |φ|² dx dt`.
    fn weight(&self, p: usize, tw: &[f64]) -> f64 {
        let slice = self.grid.slice_len();
        tw[p / slice] * self.grid.spatial_weight(p) * self.phi.values()[p % slice].norm_sqr()
    }

    /// Sorted energies with cumulative measure, for evaluating many levels.
    pub fn sublevel_table(&self) -> SublevelTable {
        let tw = self.grid.time_weights();
        let mut pts: Vec<(f64, f64)> = (0..self.e_field.len())
            .map(|p| (self.e_field[p], self.weight(p, &tw)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut energies = Vec::with_capacity(pts.len());
        let mut cumulative = Vec::with_capacity(pts.len());
        for (e, w) in pts {
            acc += w;
            energies.push(e);
            cumulative.push(acc);
        }
        cumulative.iter_mut().for_each(|c| *c /= acc);
        SublevelTable { energies, cumulative }
    }
}

/// Step-function representation of `W`.
#[derive(Clone, Debug)]
pub struct SublevelTable {
    energies: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SublevelTable {
    pub fn w(&self, e: f64) -> f64 {
        let k = self.energies.partition_point(|&v| v <= e);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// `W(Ê) = (1/T) ∫∫_{E ≤ Ê} |φ|² dx dt`.
pub fn sublevel_w(profile: &EnergyProfile, e: f64) -> f64 {
    let tw = profile.grid.time_weights();
    exec::sum(profile.e_field.len(), |p| {
        if profile.e_field[p] <= e {
            profile.weight(p, &tw)
        } else {
            0.0
        }
    }) / profile.total
}

/// `-w ln w` with `0 ln 0 = 0`. Values of `w` at or above 1 (quadrature
/// overshoot of a full sublevel set) also give 0.
pub fn neg_w_ln_w(w: f64) -> f64 {
    if w <= 0.0 || w >= 1.0 {
        0.0
    } else {
        -w * w.ln()
    }
}

/// `1/T̂ = dS/dE = -W ln W`; zero where `W` is 0 or 1.
pub fn inverse_temperature(profile: &EnergyProfile, e: f64) -> f64 {
    neg_w_ln_w(sublevel_w(profile, e))
}

fn levels(e0: f64, e: f64, n_levels: usize) -> Result<Vec<f64>> {
    if !(e0.is_finite() && e.is_finite()) || e < e0 {
        return Err(Error::arg(format!("need finite E0 <= E, got [{e0}, {e}]")));
    }
    if n_levels < 2 {
        return Err(Error::arg("need at least two levels"));
    }
    let step = (e - e0) / (n_levels - 1) as f64;
    Ok((0..n_levels)
        .map(|i| if i + 1 == n_levels { e } else { e0 + i as f64 * step })
        .collect())
}

/// `S(E) = -∫_{E0}^{E} W ln W dÊ`, trapezoid over `n_levels` equispaced levels.
pub fn entropy_s(profile: &EnergyProfile, e0: f64, e: f64, n_levels: usize) -> Result<f64> {
    Ok(entropy_curve(profile, e0, e, n_levels)?
        .last()
        .map(|r| r.s)
        .unwrap_or(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub e: f64,
    pub w: f64,
    pub neg_w_ln_w: f64,
    pub s: f64,
}

/// `(Ê, W, -W ln W, S)` at every level, `S` accumulated by the trapezoid rule.
pub fn entropy_curve(profile: &EnergyProfile, e0: f64, e: f64, n_levels: usize) -> Result<Vec<EntropyRow>> {
    let lv = levels(e0, e, n_levels)?;
    let table = profile.sublevel_table();
    let mut rows: Vec<EntropyRow> = Vec::with_capacity(lv.len());
    for (i, &x) in lv.iter().enumerate() {
        let w = table.w(x);
        let f = neg_w_ln_w(w);
        let s = match rows.last() {
            None => 0.0,
            Some(prev) => prev.s + 0.5 * (f + prev.neg_w_ln_w) * (x - lv[i - 1]),
        };
        rows.push(EntropyRow {
            e: x,
            w,
            neg_w_ln_w: f,
            s,
        });
    }
    Ok(rows)
}
