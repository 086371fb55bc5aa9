use clap::ValueEnum;
use kgvar::geometry::{christoffel, metric, tangent_basis, Signature};
use kgvar::grid::{Grid, VectorField};
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, orders, write_csv, Check, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// (ρ, θ) ↦ (ρ cos θ, ρ sin θ) on [0.5, 1.5] × [0, 1].
    Polar,
    /// (ρ, θ, ϕ) ↦ spherical coordinates on [1, 1.5] × [0.7, 1.2] × [0, 0.5].
    Spherical,
    /// A fixed invertible affine map of R³.
    Affine,
}

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Embedding::Polar)]
    pub embedding: Embedding,
    /// Points per axis of each refinement level.
    #[arg(long, value_delimiter = ',', default_value = "9,17,33")]
    pub n: Vec<usize>,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(!self.n.is_empty() && self.n.iter().all(|&n| n >= 4), || "--n entries must be at least 4".into())?;
        ensure(self.n.windows(2).all(|w| w[0] < w[1]), || "--n must increase".into())
    }
}

const AFFINE: [[f64; 3]; 3] = [[2.0, 0.3, -0.1], [0.2, 1.5, 0.4], [-0.3, 0.1, 0.9]];

fn embed(kind: Embedding, n: usize) -> Result<VectorField, Failure> {
    let r = match kind {
        Embedding::Polar => {
            let g = Grid::new(&[0.5, 0.0], &[1.5, 1.0], &[n, n])?;
            VectorField::from_fn(&g, 2, |u, o| {
                o[0] = u[0] * u[1].cos();
                o[1] = u[0] * u[1].sin();
            })?
        }
        Embedding::Spherical => {
            let g = Grid::new(&[1.0, 0.7, 0.0], &[1.5, 1.2, 0.5], &[n, n, n])?;
            VectorField::from_fn(&g, 3, |u, o| {
                o[0] = u[0] * u[1].sin() * u[2].cos();
                o[1] = u[0] * u[1].sin() * u[2].sin();
                o[2] = u[0] * u[1].cos();
            })?
        }
        Embedding::Affine => {
            let g = Grid::new(&[-1.0, 0.0, 2.0], &[1.0, 3.0, 2.5], &[n, n, n])?;
            VectorField::from_fn(&g, 3, |x, o| {
                for i in 0..3 {
                    o[i] = (0..3).map(|j| AFFINE[i][j] * x[j]).sum::<f64>() + i as f64;
                }
            })?
        }
    };
    Ok(r)
}

/// Closed-form `Γ^s_ij`.
fn exact(kind: Embedding, u: &[f64], s: usize, i: usize, j: usize) -> f64 {
    let (a, b) = (i.min(j), i.max(j));
    match kind {
        Embedding::Polar => match (s, a, b) {
            (0, 1, 1) => -u[0],
            (1, 0, 1) => 1.0 / u[0],
            _ => 0.0,
        },
        Embedding::Spherical => {
            let (rho, th) = (u[0], u[1]);
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
        Embedding::Affine => 0.0,
    }
}

#[derive(Serialize)]
struct Row {
    n: usize,
    h: f64,
    max_error: f64,
}

#[derive(Serialize)]
struct Result_ {
    embedding: Embedding,
    levels: Vec<Row>,
    orders: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let kind = args.embedding;
    let mut rows = Vec::new();
    for &n in &args.n {
        let r = embed(kind, n)?;
        let m = metric(&tangent_basis(&r)?, Signature::Euclidean)?;
        let gam = christoffel(&r, &m)?;
        let g = r.grid();
        let d = g.dim();
        let mut err = 0.0f64;
        for p in (0..g.len()).filter(|&p| kind == Embedding::Affine || g.is_interior_all(p)) {
            let u = &g.coords(p)[..d];
            for s in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        err = err.max((gam.get(p, s, i, j) - exact(kind, u, s, i, j)).abs());
                    }
                }
            }
        }
        rows.push(Row {
            n,
            h: g.spacing(0),
            max_error: err,
        });
    }
    let mut checks = Vec::new();
    let ord = if kind == Embedding::Affine {
        let worst = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
        checks.push(Check::at_most("affine_vanishes", worst, 1e-8));
        Vec::new()
    } else {
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let es: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
        let ord = orders(&hs, &es);
        for (i, o) in ord.iter().enumerate() {
            checks.push(Check::at_least(format!("order_{i}"), *o, 1.9));
        }
        ord
    };
    let csv = write_csv(ctx, "christoffel.csv", &rows)?;
    let result = Result_ {
        embedding: kind,
        levels: rows,
        orders: ord,
        csv,
    };
    finish("christoffel", ctx, checks, &result)
}
