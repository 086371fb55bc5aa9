//! `kgvar` command-line front end.

mod cmd;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Units;
use report::{Failure, Outcome};

#[derive(Parser)]
#[command(name = "kgvar", version, about = "Variational Klein-Gordon kernels: solves, checks and reports")]
struct Cli {
    /// JSON file whose keys override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the JSON report and artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Nondimensional constants m = c = ħ = γ = 1 (default).
    #[arg(long, global = true, conflicts_with = "si")]
    nondim: bool,

    /// SI constants for an electron, γ = ħ²/m.
    #[arg(long, global = true)]
    si: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet Laplacian eigenpairs with dispersion roots.
    Eig(cmd::eig::Args),
    /// Flat-limit identities of both curvature densities.
    ReduceCheck(cmd::reduce::Args),
    /// Klein-Gordon residuals of stationary states under refinement.
    Residual(cmd::residual::Args),
    /// Lorentz boost of an event.
    Boost(cmd::boost::Args),
    /// Orbital/spin decomposition of the angular momentum.
    Spin(cmd::spin::Args),
    /// Sublevel measure, entropy and inverse temperature curves.
    Entropy(cmd::entropy::Args),
    /// Christoffel symbols of analytic embeddings against closed forms.
    Christoffel(cmd::christoffel::Args),
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KGVAR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("KGVAR_THREADS={raw} is not a thread count")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    init_threads()?;
    let file = config::ConfigFile::load(cli.config.as_deref())?;
    let units = file.units.unwrap_or(if cli.si { Units::Si } else { Units::Nondim });
    let ctx = config::Context {
        units,
        consts: units.constants(),
        out: cli.out.clone(),
    };
    if let Some(dir) = &ctx.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    match cli.command {
        Command::Eig(a) => cmd::eig::run(file.apply("eig", a)?, &ctx),
        Command::ReduceCheck(a) => cmd::reduce::run(file.apply("reduce-check", a)?, &ctx),
        Command::Residual(a) => cmd::residual::run(file.apply("residual", a)?, &ctx),
        Command::Boost(a) => cmd::boost::run(file.apply("boost", a)?, &ctx),
        Command::Spin(a) => cmd::spin::run(file.apply("spin", a)?, &ctx),
        Command::Entropy(a) => cmd::entropy::run(file.apply("entropy", a)?, &ctx),
        Command::Christoffel(a) => cmd::christoffel::run(file.apply("christoffel", a)?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match &cli.command {
        Command::Eig(_) => "eig",
        Command::ReduceCheck(_) => "reduce-check",
        Command::Residual(_) => "residual",
        Command::Boost(_) => "boost",
        Command::Spin(_) => "spin",
        Command::Entropy(_) => "entropy",
        Command::Christoffel(_) => "christoffel",
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(f) => {
            report::emit_failure(command, &f, out.as_deref());
            ExitCode::from(f.code)
        }
    }
}
