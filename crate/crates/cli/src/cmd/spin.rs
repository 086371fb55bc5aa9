use clap::ValueEnum;
use kgvar::energy::PhysicalConstants;
use kgvar::grid::{Grid, ScalarField, VectorField};
use kgvar::relkin::{angular_decompose, boost, Axis, BoostVelocity, DecompositionNorms, Event};
use kgvar::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, orders, Check, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Static identity position field with φ = X₁ + iX₂.
    #[arg(long = "static")]
    pub static_field: bool,
    #[arg(long, value_enum, default_value_t = AxisArg::Z)]
    pub axis: AxisArg,
    /// Grid points per axis (space and time) of each refinement level.
    #[arg(long, value_delimiter = ',', default_value = "9,17")]
    pub n: Vec<usize>,
    /// Uniform translation velocity of the position field.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.3,-0.2,0.25")]
    pub u: Vec<f64>,
    /// Step of the ε-difference oracle.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Time span of the grid.
    #[arg(long, default_value_t = 0.5)]
    pub duration: f64,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(!self.n.is_empty() && self.n.iter().all(|&n| n >= 4), || "--n entries must be at least 4".into())?;
        ensure(self.u.len() == 3 && self.u.iter().all(|v| v.is_finite()), || "--u takes three components".into())?;
        ensure(self.eps > 0.0 && self.eps < 1e-2, || "--eps must lie in (0, 1e-2)".into())?;
        ensure(self.duration > 0.0 && self.duration.is_finite(), || "--duration must be positive".into())
    }
}

/// Oracle tolerance declared for a grid of spacing `h`: `C h² + ε²`-scale slack.
pub fn declared_tolerance(h: f64, eps: f64) -> f64 {
    2.0 * h * h + 10.0 * eps * eps
}

#[derive(Serialize)]
struct Level {
    n: usize,
    h: f64,
    norms: DecompositionNorms,
    oracle_max_error: f64,
    declared_tolerance: f64,
}

#[derive(Serialize)]
struct Result_ {
    mode: &'static str,
    axis: AxisArg,
    velocity: Vec<f64>,
    eps: f64,
    levels: Vec<Level>,
    orders: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbital_eigen_error: Option<f64>,
}

fn spatial(n: usize) -> Result<Grid, Failure> {
    Ok(Grid::new(&[0.2, -0.5, 0.0], &[1.2, 0.5, 1.0], &[n, n, n])?)
}

/// Smooth analytic wave function of the primed coordinates.
fn varphi(tp: f64, xp: &[f64; 3]) -> Complex64 {
    let env = (-0.2 * xp.iter().map(|a| a * a).sum::<f64>()).exp();
    Complex64::new(1.0 + 0.3 * xp[0], 0.5 * xp[1] - 0.2 * xp[2]) * env * Complex64::from_polar(1.0, -0.8 * tp)
}

fn material(x: &[f64], t: f64, u: &[f64]) -> [f64; 3] {
    [x[0] + 0.2 * x[1] + u[0] * t, x[1] + u[1] * t, x[2] - 0.1 * x[0] + u[2] * t]
}

fn primed(t: f64, x: [f64; 3], v: &BoostVelocity, k: &PhysicalConstants) -> Event {
    boost(&Event { t, x }, v, k)
}

fn run_static(args: &Args, ctx: &Context) -> Result<Outcome, Failure> {
    let k = ctx.consts;
    let axis: Axis = args.axis.into();
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    let mut eigen_err = 0.0f64;
    for &n in &args.n {
        let s = spatial(n)?;
        let g = Grid::with_duration(args.duration, n, k.c, &s)?;
        let r = VectorField::from_fn(&g, 3, |x, o| o.copy_from_slice(&x[1..]))?;
        // eigenfunction of the chosen generator with eigenvalue ħ
        let phi = ScalarField::from_fn(&g, |x| match axis {
            Axis::Z => Complex64::new(x[1], x[2]),
            Axis::X => Complex64::new(x[2], x[3]),
            Axis::Y => Complex64::new(x[3], x[1]),
        });
        let d = angular_decompose(&phi, &r, axis, &k)?;
        let norms = d.norms();
        for p in 0..g.len() {
            if g.is_interior_all(p) {
                eigen_err = eigen_err.max((d.l.values()[p] - phi.values()[p] * k.hbar).norm());
            }
        }
        checks.push(Check::at_most(format!("spin_norm_n{n}"), norms.s, 0.0));
        checks.push(Check::at_most(format!("identity_n{n}"), norms.identity_defect, 1e-12 * norms.j.max(1.0)));
        levels.push(Level {
            n,
            h: s.spacing(0),
            norms,
            oracle_max_error: 0.0,
            declared_tolerance: 0.0,
        });
    }
    checks.push(Check::at_most("orbital_eigenvalue", eigen_err, 1e-10));
    let result = Result_ {
        mode: "static",
        axis: args.axis,
        velocity: vec![0.0; 3],
        eps: args.eps,
        levels,
        orders: Vec::new(),
        orbital_eigen_error: Some(eigen_err),
    };
    finish("spin", ctx, checks, &result)
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    if args.static_field {
        return run_static(&args, ctx);
    }
    let k = ctx.consts;
    let c = k.c;
    let axis: Axis = args.axis.into();
    let u = args.u.clone();
    let v = BoostVelocity::new([u[0], u[1], u[2]], &k)?;
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    for &n in &args.n {
        let s = spatial(n)?;
        let g = Grid::with_duration(args.duration, n, c, &s)?;
        let r = VectorField::from_fn(&g, 3, |x, o| o.copy_from_slice(&material(&x[1..], x[0] / c, &u)))?;
        let phi = ScalarField::from_fn(&g, |x| {
            let e = primed(x[0] / c, material(&x[1..], x[0] / c, &u), &v, &k);
            varphi(e.t, &e.x)
        });
        let d = angular_decompose(&phi, &r, axis, &k)?;
        let mut worst = 0.0f64;
        for p in 0..g.len() {
            if !g.is_interior_all(p) {
                continue;
            }
            let q = g.coords(p);
            let t = q[0] / c;
            let w = axis.generator(&q[1..4]);
            let m = material(&q[1..4], t, &u);
            let at = |e: f64| {
                let ev = primed(t, [m[0] + e * w[0], m[1] + e * w[1], m[2] + e * w[2]], &v, &k);
                varphi(ev.t, &ev.x)
            };
            let oracle = (at(args.eps) - at(-args.eps)) / (2.0 * args.eps) * Complex64::new(0.0, -k.hbar);
            worst = worst.max((d.j.values()[p] - oracle).norm());
        }
        let h = s.spacing(0);
        let tol = declared_tolerance(h, args.eps);
        let norms = d.norms();
        checks.push(Check::at_most(format!("identity_n{n}"), norms.identity_defect, 1e-12 * norms.j.max(1.0)));
        checks.push(Check::at_most(format!("epsilon_oracle_n{n}"), worst, tol));
        levels.push(Level {
            n,
            h,
            norms,
            oracle_max_error: worst,
            declared_tolerance: tol,
        });
    }
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let errs: Vec<f64> = levels.iter().map(|l| l.oracle_max_error).collect();
    let ord = orders(&hs, &errs);
    for (i, o) in ord.iter().enumerate() {
        checks.push(Check::at_least(format!("oracle_order_{i}"), *o, 1.8));
    }
    let result = Result_ {
        mode: "translating",
        axis: args.axis,
        velocity: u,
        eps: args.eps,
        levels,
        orders: ord,
        orbital_eigen_error: None,
    };
    finish("spin", ctx, checks, &result)
}
