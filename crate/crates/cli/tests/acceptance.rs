//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use kgvar::energy::PhysicalConstants;
use kgvar::grid::Grid;
use kgvar::kg_solver::{dispersion_e2, laplacian_eigs, solve_e1};
use kgvar::relkin::{boost, BoostVelocity, Event};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn kgvar(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_kgvar"))
        .args(args)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), report)
}

fn checks(r: &Value) -> &Vec<Value> {
    r["checks"].as_array().expect("report has checks")
}

fn value(r: &Value, name: &str) -> Result<f64, String> {
    checks(r)
        .iter()
        .find(|c| c["name"] == name)
        .and_then(|c| c["value"].as_f64())
        .ok_or_else(|| format!("report lacks check {name}"))
}

fn values_with_prefix(r: &Value, prefix: &str) -> Vec<f64> {
    checks(r)
        .iter()
        .filter(|c| c["name"].as_str().is_some_and(|n| n.starts_with(prefix)))
        .filter_map(|c| c["value"].as_f64())
        .collect()
}

fn eigenvalue_oracle() -> Outcome {
    let start = Instant::now();
    let exact = 3.0 * PI * PI;
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for n in [8, 16, 32] {
        let g = Grid::unit_cube(3, n).map_err(|e| e.to_string())?;
        let p = laplacian_eigs(&g, 1).map_err(|e| e.to_string())?;
        errs.push((p[0].lambda - exact).abs());
        hs.push(g.spacing(0));
    }
    let rel = errs[2] / exact;
    let orders: Vec<f64> = (0..2).map(|i| (errs[i] / errs[i + 1]).ln() / (hs[i] / hs[i + 1]).ln()).collect();
    let secs = start.elapsed().as_secs_f64();
    ensure(rel <= 5e-3, format!("relative error {rel:e} at 32³"))?;
    ensure(orders.iter().all(|&o| o >= 1.9), format!("orders {orders:?}"))?;
    ensure(secs <= 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("rel err {rel:.2e}, orders {:.3}/{:.3}, {secs:.1} s", orders[0], orders[1]))
}

fn flat_reduction() -> Outcome {
    let start = Instant::now();
    let (code, r) = kgvar(&["reduce-check", "--n", "16"]);
    let devs: Vec<f64> = checks(&r).iter().filter_map(|c| c["value"].as_f64()).collect();
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    ensure(code == 0 && devs.len() == 4, format!("exit {code}, {} forms", devs.len()))?;
    ensure(worst <= 1e-9, format!("deviation {worst:e}"))?;
    let (bad_code, bad) = kgvar(&["reduce-check", "--n", "16", "--perturb", "0.1"]);
    let least = checks(&bad).iter().filter_map(|c| c["value"].as_f64()).fold(f64::INFINITY, f64::min);
    ensure(bad_code == 1 && least > 1e-9, format!("negative control exit {bad_code}, deviation {least:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 20.0, format!("took {secs:.1} s for both runs"))?;
    Ok(format!("max deviation {worst:.1e}, control {least:.2e}, {secs:.1} s"))
}

fn dispersion_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = PhysicalConstants::new(
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
        )
        .map_err(|e| e.to_string())?;
        let lambda = rng.gen_range(0.0..500.0);
        let roots = solve_e1(lambda, &k).map_err(|e| e.to_string())?;
        let a = k.gamma / (2.0 * k.c * k.c * k.hbar * k.hbar);
        for e1 in [roots.e1_plus, roots.e1_minus] {
            let scale = a * e1 * e1 + k.m * k.c * k.c + e1.abs();
            let e2 = -a * e1 * e1 + k.m * k.c * k.c - e1;
            worst = worst.max((dispersion_e2(e1, &k) - e2).abs() / scale);
            worst = worst.max((dispersion_e2(e1, &k) + 0.5 * k.gamma * lambda).abs() / scale);
        }
    }
    ensure(worst <= 1e-12, format!("relative mismatch {worst:e}"))?;
    Ok(format!("20 draws, worst relative mismatch {worst:.1e}"))
}

fn kg_residual() -> Outcome {
    let start = Instant::now();
    let (code, r) = kgvar(&["residual", "--mode", "1", "--refine", "3", "--root", "principal"]);
    let orders = values_with_prefix(&r, "order_");
    let subs = values_with_prefix(&r, "substitution_");
    let secs = start.elapsed().as_secs_f64();
    ensure(code == 0, format!("exit {code}"))?;
    ensure(orders.len() == 4 && orders.iter().all(|&o| o >= 1.9), format!("orders {orders:?}"))?;
    ensure(subs.len() == 3 && subs.iter().all(|&s| s <= 1e-12), format!("substitution {subs:?}"))?;
    ensure(secs <= 120.0, format!("took {secs:.1} s"))?;
    let least = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let sub = subs.iter().cloned().fold(0.0, f64::max);
    Ok(format!("min order {least:.3}, substitution {sub:.1e}, {secs:.1} s"))
}

fn christoffel_oracle() -> Outcome {
    let mut parts = Vec::new();
    for emb in ["polar", "spherical"] {
        let (code, r) = kgvar(&["christoffel", "--embedding", emb]);
        let orders = values_with_prefix(&r, "order_");
        ensure(code == 0 && orders.len() == 2, format!("{emb}: exit {code}"))?;
        ensure(orders.iter().all(|&o| o >= 1.9), format!("{emb}: orders {orders:?}"))?;
        parts.push(format!("{emb} min order {:.3}", orders.iter().cloned().fold(f64::INFINITY, f64::min)));
    }
    let (code, r) = kgvar(&["christoffel", "--embedding", "affine"]);
    let affine = value(&r, "affine_vanishes")?;
    ensure(code == 0 && affine <= 1e-8, format!("affine |Γ| {affine:e}"))?;
    parts.push(format!("affine |Γ| {affine:.1e}"));
    Ok(parts.join(", "))
}

fn lorentz_suite() -> Outcome {
    let k = PhysicalConstants::nondimensional();
    let c = k.c;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut wi, mut wr) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let dir: [f64; 3] = loop {
            let d: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = d.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                break [d[0] / n, d[1] / n, d[2] / n];
            }
        };
        let s = rng.gen_range(0.0..=0.9) * c;
        let v = BoostVelocity::new([dir[0] * s, dir[1] * s, dir[2] * s], &k).map_err(|e| e.to_string())?;
        let e = Event::new(
            rng.gen_range(-5.0..5.0),
            [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
        )
        .map_err(|e| e.to_string())?;
        let size = (c * e.t).powi(2) + e.x.iter().map(|a| a * a).sum::<f64>();
        let b = boost(&e, &v, &k);
        wi = wi.max((b.interval(c) - e.interval(c)).abs() / size);
        let back = boost(&b, &v.reversed(), &k);
        let dev = (c * (back.t - e.t)).abs().max((0..3).map(|j| (back.x[j] - e.x[j]).abs()).fold(0.0, f64::max));
        wr = wr.max(dev / size.sqrt());
    }
    let zero = BoostVelocity::new([0.0; 3], &k).map_err(|e| e.to_string())?;
    let e = Event::new(1.0, [2.0, 3.0, 4.0]).map_err(|e| e.to_string())?;
    let same = boost(&e, &zero, &k);
    ensure(wi <= 1e-10, format!("interval {wi:e}"))?;
    ensure(wr <= 1e-12, format!("round trip {wr:e}"))?;
    ensure(same.t == e.t && same.x == e.x, "v = 0 moved the event".into())?;
    Ok(format!("10^4 events, interval {wi:.1e}, round trip {wr:.1e}, v = 0 exact"))
}

fn spin_suite() -> Outcome {
    let mut worst_id = 0.0f64;
    let mut parts = Vec::new();
    for axis in ["z", "x", "y"] {
        let (code, r) = kgvar(&["spin", "--axis", axis]);
        ensure(code == 0, format!("axis {axis}: exit {code}"))?;
        for l in r["result"]["levels"].as_array().unwrap() {
            let err = l["oracle_max_error"].as_f64().unwrap();
            let tol = l["declared_tolerance"].as_f64().unwrap();
            ensure(err <= tol, format!("axis {axis}: oracle {err:e} > {tol:e}"))?;
            let n = &l["norms"];
            let id = n["identity_defect"].as_f64().unwrap();
            ensure(id <= 1e-12 * n["j"].as_f64().unwrap().max(1.0), format!("axis {axis}: identity {id:e}"))?;
            worst_id = worst_id.max(id);
        }
        let ord = values_with_prefix(&r, "oracle_order_");
        parts.push(format!("{axis} order {:.2}", ord[0]));
    }
    let (code, r) = kgvar(&["spin", "--static"]);
    let s = r["result"]["levels"][0]["norms"]["s"].as_f64().unwrap_or(f64::NAN);
    let eig = value(&r, "orbital_eigenvalue")?;
    ensure(code == 0 && s == 0.0, format!("static |S| {s:e}"))?;
    ensure(eig <= 1e-10, format!("L eigenvalue error {eig:e}"))?;
    Ok(format!("identity {worst_id:.1e}, {}, static |S| = 0, L error {eig:.1e}", parts.join(" ")))
}

fn entropy_suite() -> Outcome {
    let (code, r) = kgvar(&["entropy", "--levels", "256"]);
    ensure(code == 0, format!("exit {code}"))?;
    for p in ["two-level", "linear", "constant"] {
        ensure(value(&r, &format!("{p}_monotone"))? == 1.0, format!("{p}: not monotone"))?;
        let w = value(&r, &format!("{p}_w_bound"))?;
        ensure((0.0..=1.0 + 1e-6).contains(&w), format!("{p}: max W {w}"))?;
    }
    let s0 = value(&r, "constant_zero_entropy")?;
    let two = value(&r, "two-level_closed_form")?;
    let lin = value(&r, "linear_inverse_temperature")?;
    ensure(s0 <= 1e-12, format!("constant S {s0:e}"))?;
    ensure(two <= 0.02, format!("two-level relative {two:e}"))?;
    ensure(lin <= 0.02, format!("dS/dE relative {lin:e}"))?;
    Ok(format!("constant S {s0:.1e}, two-level rel {two:.1e}, dS/dE rel {lin:.1e}"))
}

fn run_into(dir: &Path, args: &[&str]) -> Result<(), String> {
    let mut full = vec!["--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    let (code, _) = kgvar(&full);
    ensure(code == 0, format!("{args:?}: exit {code}"))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 9] = [
        &["eig", "--n", "16", "--k", "4"],
        &["reduce-check", "--n", "8", "--perturb", "0"],
        &["residual", "--refine", "2"],
        &["boost", "--v", "0.3,0.2,-0.1", "--event", "1,2,3,4", "--random", "100"],
        &["spin"],
        &["spin", "--static"],
        &["entropy"],
        &["christoffel", "--embedding", "spherical"],
        &["christoffel", "--embedding", "polar"],
    ];
    let mut files = 0;
    for args in commands {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        run_into(a.path(), args)?;
        run_into(b.path(), args)?;
        let mut names: Vec<_> = std::fs::read_dir(a.path())
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            let x = std::fs::read(a.path().join(&name)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.path().join(&name)).map_err(|e| format!("{name:?} missing on rerun: {e}"))?;
            let same = if name.to_string_lossy() == format!("{}.json", args[0]) {
                strip_timestamp(&x) == strip_timestamp(&y)
            } else {
                x == y
            };
            ensure(same, format!("{args:?}: {name:?} differs"))?;
            files += 1;
        }
    }
    Ok(format!("9 runs, {files} artifacts identical modulo timestamp"))
}

/// Report bytes with the timestamp line removed.
fn strip_timestamp(bytes: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("eigenvalue oracle", eigenvalue_oracle),
        ("flat-reduction identity", flat_reduction),
        ("dispersion consistency", dispersion_consistency),
        ("Klein-Gordon residual", kg_residual),
        ("Christoffel oracle", christoffel_oracle),
        ("Lorentz suite", lorentz_suite),
        ("spin suite", spin_suite),
        ("entropy suite", entropy_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
