use clap::ValueEnum;
use kgvar::entropy::{entropy_curve, inverse_temperature, EnergyProfile, EntropyRow, NORMALIZATION_TOL};
use kgvar::grid::{Grid, ScalarField};
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, write_csv, Check, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// E₁ = -1 on half the domain and 2 on the other half.
    TwoLevel,
    /// E₁ = x on [0, 1].
    Linear,
    /// E₁ constant.
    Constant,
    All,
}

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Profile::All)]
    pub profile: Profile,
    /// Number of equispaced energy levels.
    #[arg(long, default_value_t = 256)]
    pub levels: usize,
    /// Spatial points of the one-dimensional domain.
    #[arg(long, default_value_t = 2001)]
    pub n: usize,
    /// Time samples.
    #[arg(long, default_value_t = 3)]
    pub nt: usize,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(self.levels >= 8, || "--levels must be at least 8".into())?;
        ensure(self.n >= 10, || "--n must be at least 10".into())?;
        ensure(self.nt >= 2, || "--nt must be at least 2".into())
    }
}

#[derive(Serialize)]
struct CsvRow {
    profile: &'static str,
    e: f64,
    w: f64,
    neg_w_ln_w: f64,
    s: f64,
}

#[derive(Serialize)]
struct Summary {
    profile: &'static str,
    e0: f64,
    e: f64,
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_exact: Option<f64>,
    max_w: f64,
    monotone: bool,
}

#[derive(Serialize)]
struct Result_ {
    levels: usize,
    n: usize,
    nt: usize,
    profiles: Vec<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

fn build(kind: Profile, n: usize, nt: usize) -> Result<EnergyProfile, Failure> {
    let s = Grid::new(&[0.0], &[1.0], &[n])?;
    let g = Grid::space_time(0.0, 2.0, nt, &s)?;
    let e1 = ScalarField::from_real_fn(&g, |x| match kind {
        Profile::TwoLevel => {
            if x[1] < 0.5 {
                -1.0
            } else {
                2.0
            }
        }
        Profile::Linear => x[1],
        _ => 0.3,
    });
    let phi = ScalarField::from_real_fn(&s, |_| 1.0);
    Ok(EnergyProfile::new(&e1, &phi, 0.0)?)
}

fn name(kind: Profile) -> &'static str {
    match kind {
        Profile::TwoLevel => "two-level",
        Profile::Linear => "linear",
        Profile::Constant => "constant",
        Profile::All => "all",
    }
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let kinds = match args.profile {
        Profile::All => vec![Profile::TwoLevel, Profile::Linear, Profile::Constant],
        k => vec![k],
    };
    let mut checks = Vec::new();
    let mut summaries = Vec::new();
    let mut csv = Vec::new();
    for kind in kinds {
        let label = name(kind);
        let p = build(kind, args.n, args.nt)?;
        let (e0, e) = match kind {
            Profile::TwoLevel => (-2.0, 3.0),
            Profile::Linear => (-0.2, 1.2),
            _ => (-1.0, 1.0),
        };
        let rows: Vec<EntropyRow> = entropy_curve(&p, e0, e, args.levels)?;
        let monotone = rows.windows(2).all(|w| w[1].w >= w[0].w && w[1].s >= w[0].s);
        let max_w = rows.iter().map(|r| r.w).fold(0.0, f64::max);
        checks.push(Check::at_least(format!("{label}_monotone"), monotone as u8 as f64, 1.0));
        checks.push(Check::at_most(format!("{label}_w_bound"), max_w, 1.0 + NORMALIZATION_TOL));
        let s_final = rows.last().map(|r| r.s).unwrap_or(0.0);
        let mut s_exact = None;
        match kind {
            Profile::TwoLevel => {
                let exact = 3.0 * 0.5 * 2f64.ln();
                s_exact = Some(exact);
                checks.push(Check::at_most("two-level_closed_form", (s_final / exact - 1.0).abs(), 0.02));
            }
            Profile::Linear => {
                let mut worst = 0.0f64;
                for i in 1..rows.len() - 1 {
                    if !(0.05..=0.95).contains(&rows[i].w) {
                        continue;
                    }
                    let fd = (rows[i + 1].s - rows[i - 1].s) / (rows[i + 1].e - rows[i - 1].e);
                    let t = inverse_temperature(&p, rows[i].e);
                    worst = worst.max((fd / t - 1.0).abs());
                }
                checks.push(Check::at_most("linear_inverse_temperature", worst, 0.02));
            }
            _ => {
                s_exact = Some(0.0);
                checks.push(Check::at_most("constant_zero_entropy", s_final.abs(), 1e-12));
            }
        }
        csv.extend(rows.iter().map(|r| CsvRow {
            profile: label,
            e: r.e,
            w: r.w,
            neg_w_ln_w: r.neg_w_ln_w,
            s: r.s,
        }));
        summaries.push(Summary {
            profile: label,
            e0,
            e,
            s: s_final,
            s_exact,
            max_w,
            monotone,
        });
    }
    let path = write_csv(ctx, "entropy.csv", &csv)?;
    let result = Result_ {
        levels: args.levels,
        n: args.n,
        nt: args.nt,
        profiles: summaries,
        csv: path,
    };
    finish("entropy", ctx, checks, &result)
}
