use anyhow::anyhow;
use clap::{Args, ValueEnum};
use serde::Serialize;
use spherestab::certify::{perturbation_search, SearchConfig, SearchInit};
use spherestab::measures::SeededStream;

use crate::config::Settings;
use crate::failure::Failure;
use crate::output::{self, Format};
use crate::{Common, Outcome, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Fopt,
    Random,
}

impl std::str::FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Correlation ρ in [0, 0.104).
    #[arg(long)]
    rho: Option<f64>,
    /// Starting function.
    #[arg(long, value_enum)]
    init: Option<Init>,
    /// Coefficient noise of a random start.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Harmonic degree per shell.
    #[arg(long)]
    degree: Option<usize>,
    /// Number of radial shells.
    #[arg(long)]
    shells: Option<usize>,
    /// Iteration cap.
    #[arg(long)]
    iterations: Option<usize>,
    /// Fixed training pairs.
    #[arg(long)]
    train_count: Option<usize>,
    /// Fresh validation pairs per iteration (0 disables).
    #[arg(long)]
    count: Option<usize>,
    /// Pairs of the terminal estimate.
    #[arg(long)]
    final_count: Option<usize>,
    /// Initial step length.
    #[arg(long)]
    step: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    iteration: usize,
    objective: f64,
    validation: Option<f64>,
    validation_std_error: Option<f64>,
    gap: Option<f64>,
    step: f64,
    halvings: usize,
    accepted: bool,
    gradient_norm: f64,
    mean_correction: f64,
    projection_flagged: f64,
    seed: u64,
}

pub fn run(args: &SearchArgs, settings: &mut Settings, ctx: &Run) -> Result<Outcome, Failure> {
    let rho = settings.value_or("rho", args.rho, 0.05)?;
    let init = settings.value_or("init", args.init, Init::Random)?;
    let amplitude = settings.value_or("amplitude", args.amplitude, 0.3)?;
    let mut config = SearchConfig::new(
        rho,
        match init {
            Init::Fopt => SearchInit::Fopt,
            Init::Random => SearchInit::Random { amplitude },
        },
    );
    config.degree = settings.value_or("degree", args.degree, config.degree)?;
    config.shells = settings.value_or("shells", args.shells, config.shells)?;
    config.iterations = settings.value_or("iterations", args.iterations, config.iterations)?;
    config.train_count = settings.value_or("train_count", args.train_count, config.train_count)?;
    config.validation_count = settings.value_or("count", args.count, config.validation_count)?;
    config.final_count = settings.value_or("final_count", args.final_count, config.final_count)?;
    config.step = settings.value_or("step", args.step, config.step)?;
    settings.finish()?;
    if config.shells < 2 || config.degree > 8 {
        return Err(Failure::Data(anyhow!("need shells >= 2 and degree <= 8")));
    }
    let record = perturbation_search(&config, &SeededStream::new(ctx.seed, 0))?;
    let fails = usize::from(record.significant_excess);
    let body = match ctx.format {
        Format::Json => output::json(&record)?,
        Format::Csv => output::csv(record.trace.iter().map(|t| CsvRow {
            iteration: t.iteration,
            objective: t.objective,
            validation: t.validation.as_ref().map(|v| v.value),
            validation_std_error: t.validation.as_ref().map(|v| v.std_error),
            gap: t.gap,
            step: t.step,
            halvings: t.halvings,
            accepted: t.accepted,
            gradient_norm: t.gradient_norm,
            mean_correction: t.mean_correction,
            projection_flagged: t.projection_flagged,
            seed: record.seed,
        }))?,
    };
    Ok(Outcome { body, fails })
}
