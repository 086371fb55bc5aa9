use std::f64::consts::PI;

use clap::ValueEnum;
use kgvar::grid::{write_field, ContainerFormat, FieldContainer, Grid};
use kgvar::kg_solver::{dispersion_e2, laplacian_eigs_with, solve_e1, EigOptions};
use serde::{Deserialize, Serialize};

use super::CLUSTER_GAP;
use crate::config::{ensure, Context, Validate};
use crate::report::{finish, Check, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Binary,
    Json,
}

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Box side lengths; their count sets the dimension.
    #[arg(long = "box", value_delimiter = ',', default_value = "1,1,1")]
    #[serde(rename = "box")]
    pub lengths: Vec<f64>,
    /// Grid points per axis, boundary included.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Seed of the Lanczos start vectors.
    #[arg(long, default_value_t = EigOptions::default().seed)]
    pub seed: u64,
    /// Container format for the eigenvectors written to --out.
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    pub format: Format,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure((1..=3).contains(&self.lengths.len()), || "--box takes 1 to 3 lengths".into())?;
        ensure(self.lengths.iter().all(|l| l.is_finite() && *l > 0.0), || "box lengths must be positive".into())?;
        ensure(self.n >= 3, || "--n must be at least 3".into())?;
        ensure(self.k >= 1, || "--k must be at least 1".into())?;
        let interior = (self.n - 2).pow(self.lengths.len() as u32) as u64;
        ensure(self.k <= interior, || format!("--k {} exceeds the {interior} interior points", self.k))
    }
}

#[derive(Serialize)]
struct Mode {
    index: usize,
    lambda: f64,
    residual: f64,
    e1_principal: f64,
    e1_other: f64,
    discriminant: f64,
    /// `-γλ/2`.
    e2: f64,
    analytic_lambda: f64,
    analytic_rel_error: f64,
    discrete_closed_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Serialize)]
struct Cluster {
    first: usize,
    size: usize,
    lambda: f64,
    analytic_lambda: f64,
}

#[derive(Serialize)]
struct Result_ {
    dim: usize,
    lengths: Vec<f64>,
    n: usize,
    spacing: Vec<f64>,
    seed: u64,
    modes: Vec<Mode>,
    clusters: Vec<Cluster>,
    gram_max_deviation: f64,
}

/// Mode triples of the `k` smallest values of `f`, ascending.
fn smallest_modes(dim: usize, k: usize, max_index: usize, f: impl Fn(&[usize]) -> f64) -> Vec<f64> {
    let top = k.min(max_index);
    let mut vals = Vec::new();
    let mut idx = vec![1usize; dim];
    loop {
        vals.push(f(&idx));
        let mut a = 0;
        while a < dim {
            idx[a] += 1;
            if idx[a] <= top {
                break;
            }
            idx[a] = 1;
            a += 1;
        }
        if a == dim {
            break;
        }
    }
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    vals
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let dim = args.lengths.len();
    let k = args.k as usize;
    let zeros = vec![0.0; dim];
    let grid = Grid::new(&zeros, &args.lengths, &vec![args.n; dim])?;
    let opts = EigOptions {
        seed: args.seed,
        ..EigOptions::default()
    };
    let pairs = laplacian_eigs_with(&grid, k, &opts)?;
    let h: Vec<f64> = (0..dim).map(|a| grid.spacing(a)).collect();

    let analytic = smallest_modes(dim, k, usize::MAX, |j| {
        (0..dim).map(|a| (PI * j[a] as f64 / args.lengths[a]).powi(2)).sum()
    });
    let discrete = smallest_modes(dim, k, args.n - 2, |j| {
        (0..dim)
            .map(|a| 2.0 / (h[a] * h[a]) * (1.0 - (PI * j[a] as f64 * h[a] / args.lengths[a]).cos()))
            .sum()
    });

    let consts = ctx.consts;
    let mut checks = Vec::new();
    let mut modes = Vec::new();
    let mut worst_disp = 0.0f64;
    let mut worst_closed = 0.0f64;
    for (i, p) in pairs.iter().enumerate() {
        let roots = solve_e1(p.lambda, &consts)?;
        let e2 = -0.5 * consts.gamma * p.lambda;
        let a = consts.gamma / (2.0 * consts.c * consts.c * consts.hbar * consts.hbar);
        for e1 in [roots.e1_plus, roots.e1_minus] {
            let scale = a * e1 * e1 + consts.rest_energy() + e1.abs();
            worst_disp = worst_disp.max((dispersion_e2(e1, &consts) - e2).abs() / scale);
        }
        worst_closed = worst_closed.max((p.lambda - discrete[i]).abs() / discrete[i]);
        let file = match &ctx.out {
            Some(dir) => {
                let (fmt, ext) = match args.format {
                    Format::Binary => (ContainerFormat::Binary, "kgvf"),
                    Format::Json => (ContainerFormat::Json, "json"),
                };
                let name = format!("eig_mode_{}.{ext}", i + 1);
                write_field(&dir.join(&name), &FieldContainer::Scalar(p.phi2.clone()), fmt)?;
                Some(name)
            }
            None => None,
        };
        modes.push(Mode {
            index: i + 1,
            lambda: p.lambda,
            residual: p.residual,
            e1_principal: roots.e1_plus,
            e1_other: roots.e1_minus,
            discriminant: roots.discriminant,
            e2,
            analytic_lambda: analytic[i],
            analytic_rel_error: (p.lambda - analytic[i]).abs() / analytic[i],
            discrete_closed_form: discrete[i],
            file,
        });
        checks.push(Check::at_most(format!("residual_mode_{}", i + 1), p.residual, opts.tol));
    }
    checks.push(Check::at_most("dispersion_relative", worst_disp, 1e-12));
    checks.push(Check::at_most("discrete_closed_form_relative", worst_closed, 1e-8));

    let mut gram_dev = 0.0f64;
    for (i, a) in pairs.iter().enumerate() {
        for (j, b) in pairs.iter().enumerate() {
            let v = grid.quadrature(|q| (a.phi2.values()[q] * b.phi2.values()[q]).re);
            let want = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((v - want).abs());
        }
    }
    checks.push(Check::at_most("orthonormality", gram_dev, 1e-8));

    let mut clusters = Vec::new();
    let mut lo = 0;
    while lo < pairs.len() {
        let mut hi = lo + 1;
        while hi < pairs.len() && (pairs[hi].lambda - pairs[hi - 1].lambda).abs() <= CLUSTER_GAP * pairs[hi].lambda {
            hi += 1;
        }
        clusters.push(Cluster {
            first: lo + 1,
            size: hi - lo,
            lambda: pairs[lo].lambda,
            analytic_lambda: analytic[lo],
        });
        lo = hi;
    }

    let result = Result_ {
        dim,
        lengths: args.lengths.clone(),
        n: args.n,
        spacing: h,
        seed: args.seed,
        modes,
        clusters,
        gram_max_deviation: gram_dev,
    };
    finish("eig", ctx, checks, &result)
}
