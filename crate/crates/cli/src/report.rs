use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use kgvar::energy::PhysicalConstants;
use serde::Serialize;

use crate::config::Context;

pub const SCHEMA: &str = "kgvar-report/1";

pub const EXIT_CHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_NUMERIC,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<kgvar::Error> for Failure {
    fn from(e: kgvar::Error) -> Self {
        let code = match e {
            kgvar::Error::Argument(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=",
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">=",
            tolerance,
            passed: value >= tolerance,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    version: &'static str,
    backend: &'static str,
    units: &'static str,
    constants: PhysicalConstants,
    timestamp: u64,
    status: &'static str,
    checks: &'a [Check],
    result: &'a T,
}

pub struct Outcome {
    passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            EXIT_CHECK
        }
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// Prints the report to stdout and, with `--out`, writes `<command>.json`.
pub fn finish<T: Serialize>(command: &str, ctx: &Context, checks: Vec<Check>, result: &T) -> Result<Outcome, Failure> {
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        schema: SCHEMA,
        command,
        version: env!("CARGO_PKG_VERSION"),
        backend: kgvar::exec::BACKEND,
        units: ctx.units.name(),
        constants: ctx.consts,
        timestamp: now(),
        status: if passed { "pass" } else { "fail" },
        checks: &checks,
        result,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::usage(e.to_string()))? + "\n";
    print!("{text}");
    if let Some(dir) = &ctx.out {
        write(&dir.join(format!("{command}.json")), &text)?;
    }
    Ok(Outcome { passed })
}

#[derive(Serialize)]
struct FailureReport<'a> {
    schema: &'static str,
    command: &'a str,
    version: &'static str,
    timestamp: u64,
    status: &'static str,
    exit_code: u8,
    error: &'a str,
}

/// Diagnostic JSON on stdout (and `--out`), message on stderr.
pub fn emit_failure(command: &str, f: &Failure, out: Option<&Path>) {
    eprintln!("kgvar {command}: {}", f.message);
    let report = FailureReport {
        schema: SCHEMA,
        command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp: now(),
        status: "error",
        exit_code: f.code,
        error: &f.message,
    };
    if let Ok(text) = serde_json::to_string_pretty(&report) {
        println!("{text}");
        if let Some(dir) = out {
            if dir.is_dir() {
                let _ = std::fs::write(dir.join(format!("{command}.json")), text + "\n");
            }
        }
    }
}

/// Writes rows as RFC 4180 CSV into the output directory, if one was given.
pub fn write_csv<R: Serialize>(ctx: &Context, name: &str, rows: &[R]) -> Result<Option<String>, Failure> {
    let Some(dir) = &ctx.out else {
        return Ok(None);
    };
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::io(&path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Failure::io(&path, e))?;
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;
    Ok(Some(name.to_string()))
}

/// Observed convergence orders `ln(e_i/e_{i+1}) / ln(h_i/h_{i+1})`.
pub fn orders(h: &[f64], err: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(err.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}
