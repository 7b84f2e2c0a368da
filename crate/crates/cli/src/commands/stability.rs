use anyhow::anyhow;
use clap::Args;
use serde::Serialize;
use spherestab::certify::{theorem_margin, TheoremMargin};
use spherestab::measures::SeededStream;
use spherestab::stability::{
    fopt_stability_estimate, gaussian_spectral_stability, noise_stability_mc, FunctionSpec, StabilityEstimate,
};

use super::{check_count, function_spec};
use crate::config::Settings;
use crate::failure::Failure;
use crate::output::{self, Format};
use crate::{Common, Outcome, Run};

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// `fopt`, an inline JSON object or a JSON file.
    #[arg(long)]
    function: Option<String>,
    /// Second function for the bilinear form E⟨f(X), g(Y)⟩.
    #[arg(long)]
    pair: Option<String>,
    /// Correlation ρ in (-1, 1).
    #[arg(long)]
    rho: Option<f64>,
    /// Gaussian pairs for the Monte Carlo estimate.
    #[arg(long)]
    count: Option<usize>,
    /// Harmonic degree cap of the spectral estimate.
    #[arg(long)]
    degree: Option<usize>,
    /// Skip the spectral estimate.
    #[arg(long)]
    no_spectral: bool,
    /// Also report the stable-inequality margin (0 < |ρ| < 0.104).
    #[arg(long)]
    margin: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct Report {
    function: FunctionSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<FunctionSpec>,
    rho: f64,
    seed: u64,
    estimates: Vec<StabilityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<TheoremMargin>,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    method: String,
    value: f64,
    std_error: f64,
    count: u64,
    seed: Option<u64>,
    flags: String,
    rho: f64,
    function: &'a str,
}

pub fn run(args: &StabilityArgs, settings: &mut Settings, ctx: &Run) -> Result<Outcome, Failure> {
    let function = settings.value_or("function", args.function.clone(), "fopt".to_string())?;
    let pair = settings.value::<String>("pair", args.pair.clone())?;
    let rho = settings.value_or("rho", args.rho, 0.05)?;
    let count = check_count("count", settings.value_or("count", args.count, 1_000_000)?)?;
    let degree = settings.value_or("degree", args.degree, 16)?;
    let no_spectral = settings.switch("no_spectral", args.no_spectral)?;
    let want_margin = settings.switch("margin", args.margin)?;
    settings.finish()?;
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Failure::Data(anyhow!("rho = {rho} must lie in (-1, 1)")));
    }
    let spec_f = function_spec(&function)?;
    let spec_g = pair.as_deref().map(function_spec).transpose()?;
    let f = spec_f.build()?;
    let g = spec_g.as_ref().map(|s| s.build()).transpose()?;
    let stream = SeededStream::new(ctx.seed, 0);
    let mut estimates = vec![noise_stability_mc(&f, g.as_ref(), rho, &stream, count)?];
    if !no_spectral {
        estimates.push(gaussian_spectral_stability(&f, g.as_ref(), rho, degree)?);
    }
    if spec_f == FunctionSpec::Fopt && spec_g.is_none() {
        estimates.push(fopt_stability_estimate(rho)?);
    }
    let margin = if want_margin {
        Some(theorem_margin(
            &f,
            g.as_ref(),
            rho,
            &SeededStream::new(ctx.seed, 1),
            count,
        )?)
    } else {
        None
    };
    let fails = margin.as_ref().map_or(0, |m| usize::from(!m.holds));
    let report = Report {
        function: spec_f,
        pair: spec_g,
        rho,
        seed: ctx.seed,
        estimates,
        margin,
    };
    let body = match ctx.format {
        Format::Json => output::json(&report)?,
        Format::Csv => {
            let label = f.label();
            output::csv(report.estimates.iter().map(|e| {
                CsvRow {
                    method: serde_json::to_value(e.method)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default(),
                    value: e.value,
                    std_error: e.std_error,
                    count: e.count,
                    seed: e.seed,
                    flags: e.flags.join("; "),
                    rho,
                    function: &label,
                }
            }))?
        }
    };
    Ok(Outcome { body, fails })
}
