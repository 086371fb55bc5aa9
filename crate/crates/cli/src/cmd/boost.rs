use kgvar::relkin::{boost, BoostVelocity, Event};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ensure, Context, Validate};
use crate::report::{finish, Check, Failure, Outcome};

#[derive(clap::Args, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Boost velocity v1,v2,v3.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0,0")]
    pub v: Vec<f64>,
    /// Event t,x1,x2,x3.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0,0,0")]
    pub event: Vec<f64>,
    /// Also check this many random events and velocities with |v| <= 0.9c.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl Validate for Args {
    fn validate(&self) -> Result<(), Failure> {
        ensure(self.v.len() == 3, || "--v takes three components".into())?;
        ensure(self.event.len() == 4, || "--event takes t,x1,x2,x3".into())?;
        ensure(self.v.iter().chain(&self.event).all(|x| x.is_finite()), || "components must be finite".into())
    }
}

#[derive(Serialize)]
struct Result_ {
    event: Event,
    velocity: [f64; 3],
    primed: Event,
    interval: f64,
    interval_primed: f64,
    interval_rel_error: f64,
    round_trip_rel_error: f64,
    random_events: usize,
    random_worst_interval: f64,
    random_worst_round_trip: f64,
}

/// `(interval relative error, round-trip relative error)`.
fn errors(e: &Event, v: &BoostVelocity, ctx: &Context) -> (Event, f64, f64) {
    let c = ctx.consts.c;
    let b = boost(e, v, &ctx.consts);
    let back = boost(&b, &v.reversed(), &ctx.consts);
    let size = (c * e.t).powi(2) + e.x.iter().map(|a| a * a).sum::<f64>();
    let interval = if size > 0.0 {
        (b.interval(c) - e.interval(c)).abs() / size
    } else {
        (b.interval(c) - e.interval(c)).abs()
    };
    let scale = size.sqrt().max(f64::MIN_POSITIVE);
    let rt = (c * (back.t - e.t))
        .abs()
        .max((0..3).map(|j| (back.x[j] - e.x[j]).abs()).fold(0.0, f64::max))
        / scale;
    (b, interval, if size > 0.0 { rt } else { 0.0 })
}

pub fn run(args: Args, ctx: &Context) -> Result<Outcome, Failure> {
    let c = ctx.consts.c;
    let v = BoostVelocity::new([args.v[0], args.v[1], args.v[2]], &ctx.consts)?;
    let e = Event::new(args.event[0], [args.event[1], args.event[2], args.event[3]])?;
    let (primed, interval_err, rt_err) = errors(&e, &v, ctx);

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (mut worst_i, mut worst_rt) = (0.0f64, 0.0f64);
    let length = 1.0;
    for _ in 0..args.random {
        let dir: [f64; 3] = loop {
            let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n: f64 = d.iter().map(|a: &f64| a * a).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                break [d[0] / n, d[1] / n, d[2] / n];
            }
        };
        let s = rng.gen_range(0.0..0.9) * c;
        let vr = BoostVelocity::new([dir[0] * s, dir[1] * s, dir[2] * s], &ctx.consts)?;
        let er = Event::new(
            rng.gen_range(-length..length) / c,
            [
                rng.gen_range(-length..length),
                rng.gen_range(-length..length),
                rng.gen_range(-length..length),
            ],
        )?;
        let (_, a, b) = errors(&er, &vr, ctx);
        worst_i = worst_i.max(a);
        worst_rt = worst_rt.max(b);
    }
    let mut checks = vec![
        Check::at_most("interval_invariance", interval_err.max(worst_i), 1e-10),
        Check::at_most("round_trip", rt_err.max(worst_rt), 1e-12),
    ];
    if v.speed() == 0.0 {
        let moved = (primed.t - e.t)
            .abs()
            .max((0..3).map(|j| (primed.x[j] - e.x[j]).abs()).fold(0.0, f64::max));
        checks.push(Check::at_most("zero_velocity_identity", moved, 0.0));
    }
    let result = Result_ {
        event: e,
        velocity: v.v(),
        primed,
        interval: e.interval(c),
        interval_primed: primed.interval(c),
        interval_rel_error: interval_err,
        round_trip_rel_error: rt_err,
        random_events: args.random,
        random_worst_interval: worst_i,
        random_worst_round_trip: worst_rt,
    };
    finish("boost", ctx, checks, &result)
}
