use kgvar::geometry::{
    christoffel, curvature_density_first, curvature_density_normal, flat_density, metric, tangent_basis, Signature,
};
use kgvar::grid::{Grid, ScalarField, VectorField};
use kgvar::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, Check, Failure, Outcome};

/// Pass threshold on the max pointwise deviation.
pub const THRESHOLD: f64 = 1e-9;

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Points per axis of the space-time grid.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Amplitude of a smooth perturbation of the position field (negative control).
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// Seed of the random smooth test field.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Unit normal used by the normal-field form.
    #[arg(long, value_delimiter = ',', default_value = "0.48,0.6,0.64")]
    pub normal: Vec<f64>,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(self.n >= 4, || "--n must be at least 4".into())?;
        ensure(self.perturb.is_finite() && self.perturb.abs() < 0.2, || "--perturb must lie in (-0.2, 0.2)".into())?;
        ensure(self.normal.len() == 3, || "--normal takes three components".into())?;
        let nn: f64 = self.normal.iter().map(|v| v * v).sum();
        ensure((nn - 1.0).abs() <= 1e-12, || format!("--normal has |n|² = {nn}, expected 1"))
    }
}

#[derive(Serialize)]
struct Form {
    name: &'static str,
    reference: &'static str,
    max_deviation: f64,
    max_reference: f64,
}

#[derive(Serialize)]
struct Result_ {
    n: usize,
    points: usize,
    perturb: f64,
    seed: u64,
    forms: Vec<Form>,
}

/// Random trigonometric field with seeded coefficients.
fn test_field(grid: &Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<([f64; 4], f64, f64)> = (0..4)
        .map(|_| {
            let k = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, a, b)| {
                let ph: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum();
                Complex64::new(a * ph.cos(), b * ph.sin())
            })
            .sum()
    })
}

fn bump(x: &[f64]) -> f64 {
    x.iter().map(|v| (std::f64::consts::PI * v).sin()).product()
}

fn max_dev(a: &ScalarField, b: &ScalarField) -> Result<f64, Failure> {
    Ok(a.max_abs_diff(b)?)
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let n = args.n;
    let eps = args.perturb;
    let spatial = Grid::unit_cube(3, n)?;
    let st = Grid::space_time(0.0, 1.0, n, &spatial)?;
    let phi = test_field(&st, args.seed);
    let c = [args.normal[0], args.normal[1], args.normal[2]];
    let mut forms = Vec::new();

    // Euclidean forms on every time slice of the spatial map
    let r3 = VectorField::from_fn(&spatial, 3, |x, o| {
        o.copy_from_slice(x);
        o[0] += eps * bump(x);
    })?;
    let m3 = metric(&tangent_basis(&r3)?, Signature::Euclidean)?;
    let g3 = christoffel(&r3, &m3)?;
    let n3 = VectorField::from_fn(&spatial, 3, |_, o| o.copy_from_slice(&c))?;
    let (mut first_e, mut normal_e, mut ref_e) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..n {
        let slice = phi.time_slice(t)?;
        let flat = flat_density(&slice, Signature::Euclidean)?;
        ref_e = ref_e.max(flat.max_abs());
        first_e = first_e.max(max_dev(&curvature_density_first(&slice, &r3, &m3, &g3)?, &flat)?);
        normal_e = normal_e.max(max_dev(&curvature_density_normal(&slice, &n3, &r3, &m3)?, &flat)?);
    }
    forms.push(Form {
        name: "christoffel_euclidean",
        reference: "sum_k |d_k phi|^2",
        max_deviation: first_e,
        max_reference: ref_e,
    });
    forms.push(Form {
        name: "normal_euclidean",
        reference: "sum_k |d_k phi|^2",
        max_deviation: normal_e,
        max_reference: ref_e,
    });

    // Minkowski forms on (ct, X)
    let r4 = VectorField::from_fn(&st, 4, |x, o| {
        o.copy_from_slice(x);
        o[1] += eps * bump(x);
    })?;
    let m4 = metric(&tangent_basis(&r4)?, Signature::Minkowski)?;
    let g4 = christoffel(&r4, &m4)?;
    let flat_m = flat_density(&phi, Signature::Minkowski)?;
    forms.push(Form {
        name: "christoffel_minkowski",
        reference: "-|d_0 phi|^2 + sum_k |d_k phi|^2",
        max_deviation: max_dev(&curvature_density_first(&phi, &r4, &m4, &g4)?, &flat_m)?,
        max_reference: flat_m.max_abs(),
    });
    let n4 = VectorField::from_fn(&st, 4, |_, o| {
        o[0] = 0.0;
        o[1..].copy_from_slice(&c);
    })?;
    // the literal contraction with a spatial unit normal gives a positive time term
    let flat_all = flat_density(&phi, Signature::Euclidean)?;
    forms.push(Form {
        name: "normal_minkowski",
        reference: "|d_0 phi|^2 + sum_k |d_k phi|^2",
        max_deviation: max_dev(&curvature_density_normal(&phi, &n4, &r4, &m4)?, &flat_all)?,
        max_reference: flat_all.max_abs(),
    });

    let checks = forms
        .iter()
        .map(|f| Check::at_most(f.name, f.max_deviation, THRESHOLD))
        .collect();
    let result = Result_ {
        n,
        points: st.len(),
        perturb: eps,
        seed: args.seed,
        forms,
    };
    finish("reduce-check", ctx, checks, &result)
}
