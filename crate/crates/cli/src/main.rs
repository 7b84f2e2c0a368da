//! `spherestab`: eigenvalue tables, certification, stability estimates,
//! product-state Quantum MAX-CUT and the perturbation search.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use config::Settings;
use failure::Failure;
use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "spherestab",
    version,
    about = "Vector-valued Gaussian noise stability toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue table λ_{d,n}^{r,s}: quadrature against the Bessel closed form.
    Eigen(commands::eigen::EigenArgs),
    /// Grid certification of the numeric constants; exit code = number of FAILs.
    Certify(commands::certify::CertifyArgs),
    /// Noise stability of a function spec by Monte Carlo and spectral quadrature.
    Stability(commands::stability::StabilityArgs),
    /// Product-state Quantum MAX-CUT: evaluate or locally optimize.
    Qmaxcut(commands::qmaxcut::QmaxcutArgs),
    /// Gradient search for functions beating f_opt.
    Search(commands::search::SearchArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Master seed of stochastic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "SPHERESTAB_WORKERS")]
    workers: Option<usize>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Resolved shared options.
pub struct Run {
    pub format: Format,
    pub seed: u64,
}

/// Rendered output and the number of failed checks.
pub struct Outcome {
    pub body: String,
    pub fails: usize,
}

fn run(cli: Cli) -> Result<usize, Failure> {
    let (common, default_format) = match &cli.command {
        Command::Eigen(a) => (&a.common, Format::Csv),
        Command::Certify(a) => (&a.common, Format::Json),
        Command::Stability(a) => (&a.common, Format::Json),
        Command::Qmaxcut(a) => (&a.common, Format::Json),
        Command::Search(a) => (&a.common, Format::Json),
    };
    let mut settings = Settings::load(common.config.as_deref())?;
    let out = settings.value::<PathBuf>("out", common.out.clone())?;
    let format = settings.value_or("format", common.format, default_format)?;
    let seed = settings.value_or("seed", common.seed, 0u64)?;
    if let Some(workers) = settings.value::<usize>("workers", common.workers)? {
        if workers == 0 {
            return Err(Failure::Data(anyhow!("workers must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Failure::Evaluation(e.into()))?;
    }
    let ctx = Run { format, seed };
    let outcome = match &cli.command {
        Command::Eigen(a) => commands::eigen::run(a, &mut settings, &ctx)?,
        Command::Certify(a) => commands::certify::run(a, &mut settings, &ctx)?,
        Command::Stability(a) => commands::stability::run(a, &mut settings, &ctx)?,
        Command::Qmaxcut(a) => commands::qmaxcut::run(a, &mut settings, &ctx)?,
        Command::Search(a) => commands::search::run(a, &mut settings, &ctx)?,
    };
    output::emit(&outcome.body, out.as_deref())?;
    Ok(outcome.fails)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(fails) => ExitCode::from(fails.min(failure::EXIT_DATA as usize - 1) as u8),
        Err(e) => {
            eprintln!("spherestab: {e}");
            ExitCode::from(e.code())
        }
    }
}
