use clap::ValueEnum;
use kgvar::energy::{discrete_phase_energy, kg_residual, kg_residual_field, skg_residual, skg_residual_field};
use kgvar::grid::Grid;
use kgvar::kg_solver::{laplacian_eigs_with, solve_e1, stationary_state, EigOptions};
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, orders, write_csv, Check, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Root {
    /// The root of smaller magnitude.
    Principal,
    Other,
}

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Eigenpair index, 1-based.
    #[arg(long, default_value_t = 1)]
    pub mode: usize,
    /// Spatial points per axis on the coarsest level.
    #[arg(long, default_value_t = 9)]
    pub n: usize,
    /// Time samples on the coarsest level.
    #[arg(long, default_value_t = 17)]
    pub nt: usize,
    /// Number of levels; each halves both spacings.
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    /// Time span T in units of the chosen constants.
    #[arg(long, default_value_t = 0.6)]
    pub duration: f64,
    #[arg(long, value_enum, default_value_t = Root::Principal)]
    pub root: Root,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(self.mode >= 1, || "--mode is 1-based".into())?;
        ensure(self.n >= 4, || "--n must be at least 4".into())?;
        ensure(self.mode <= (self.n - 2).pow(3), || "--mode exceeds the interior dimension".into())?;
        ensure(self.nt >= 3, || "--nt must be at least 3".into())?;
        ensure((1..=5).contains(&self.refine), || "--refine must lie in 1..=5".into())?;
        ensure(self.duration.is_finite() && self.duration > 0.0, || "--duration must be positive".into())
    }
}

#[derive(Serialize)]
pub struct Level {
    pub level: usize,
    pub n: usize,
    pub nt: usize,
    pub h: f64,
    pub h_t: f64,
    pub lambda: f64,
    pub e1: f64,
    pub kg: f64,
    pub skg: f64,
    /// KG residual with `E₁` replaced by its central-difference image.
    pub kg_substituted: f64,
    /// `max |KG_sub - SKG|` over the residual fields.
    pub field_mismatch: f64,
}

#[derive(Serialize)]
struct Result_ {
    mode: usize,
    root: Root,
    duration: f64,
    levels: Vec<Level>,
    order_kg: Vec<f64>,
    order_skg: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<String>,
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let consts = ctx.consts;
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    for l in 0..args.refine {
        let n = (args.n - 1) * (1 << l) + 1;
        let nt = (args.nt - 1) * (1 << l) + 1;
        let spatial = Grid::unit_cube(3, n)?;
        let pair = laplacian_eigs_with(&spatial, args.mode, &EigOptions::default())?.remove(args.mode - 1);
        let roots = solve_e1(pair.lambda, &consts)?;
        let e1 = match args.root {
            Root::Principal => roots.e1_plus,
            Root::Other => roots.e1_minus,
        };
        let st = Grid::with_duration(args.duration, nt, consts.c, &spatial)?;
        let phi = stationary_state(&pair, e1, &st, &consts)?;
        let ed = discrete_phase_energy(e1, &st, &consts)?;
        let a = kg_residual_field(&phi, &vec![ed; nt], &consts)?;
        let b = skg_residual_field(&phi, &consts)?;
        let mismatch = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let scale = (consts.rest_energy() + e1.abs() + 0.5 * consts.gamma * pair.lambda) * phi.max_abs();
        checks.push(Check::at_most(format!("substitution_level_{l}"), mismatch / scale, 1e-12));
        levels.push(Level {
            level: l,
            n,
            nt,
            h: spatial.spacing(0),
            h_t: st.spacing(0) / consts.c,
            lambda: pair.lambda,
            e1,
            kg: kg_residual(&phi, &vec![e1; nt], &consts)?,
            skg: skg_residual(&phi, &consts)?,
            kg_substituted: kg_residual(&phi, &vec![ed; nt], &consts)?,
            field_mismatch: mismatch,
        });
    }
    let ht: Vec<f64> = levels.iter().map(|l| l.h_t).collect();
    let order_kg = orders(&ht, &levels.iter().map(|l| l.kg).collect::<Vec<_>>());
    let order_skg = orders(&ht, &levels.iter().map(|l| l.skg).collect::<Vec<_>>());
    for (i, (a, b)) in order_kg.iter().zip(&order_skg).enumerate() {
        checks.push(Check::at_least(format!("order_kg_{i}"), *a, 1.9));
        checks.push(Check::at_least(format!("order_skg_{i}"), *b, 1.9));
    }
    let table = write_csv(ctx, "residual.csv", &levels)?;
    let result = Result_ {
        mode: args.mode,
        root: args.root,
        duration: args.duration,
        levels,
        order_kg,
        order_skg,
        table,
    };
    finish("residual", ctx, checks, &result)
}
