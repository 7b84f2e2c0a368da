use std::collections::BTreeMap;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use serde::Serialize;
use spherestab::certify::{
    certify_change_of_measure, certify_rsq_phi, certify_tail_phi, certify_threshold, change_of_measure_default_grids,
    rsq_phi_default_grids, tail_phi_default_grids, theorem_margin_with, threshold_default_grids, CertificateReport,
    Constants, Grid, TheoremMargin,
};
use spherestab::measures::SeededStream;
use spherestab::stability::{default_shell_radii, recenter, ShellHarmonic, SphereFunction};

use super::check_count;
use crate::config::Settings;
use crate::failure::Failure;
use crate::output::{self, Format};
use crate::{Common, Outcome, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    /// The script grids only.
    Script,
    /// The wider sweeps only.
    Extended,
    /// Both.
    All,
}

impl std::str::FromStr for GridChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Which grids the scalar certifiers run on.
    #[arg(long, value_enum)]
    grid: Option<GridChoice>,
    /// Also run the stable-inequality margin batch.
    #[arg(long)]
    margins: bool,
    /// Correlation of the margin batch.
    #[arg(long)]
    rho: Option<f64>,
    /// Gaussian pairs per margin record.
    #[arg(long)]
    count: Option<usize>,
    /// Override of the change-of-measure slope 9.4.
    #[arg(long)]
    change_of_measure: Option<f64>,
    /// Override of the tail factor 0.98.
    #[arg(long)]
    tail: Option<f64>,
    /// Override of the threshold 0.104.
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct MarginRecord {
    function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<String>,
    stream_id: u64,
    #[serde(flatten)]
    margin: TheoremMargin,
}

#[derive(Debug, Serialize)]
struct MarginBatch {
    rho: f64,
    count: usize,
    seed: u64,
    records: Vec<MarginRecord>,
}

#[derive(Debug, Serialize)]
struct Consolidated {
    grid: GridChoice,
    constants: Constants,
    reports: Vec<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margins: Option<MarginBatch>,
    fails: usize,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    certifier: String,
    segment: String,
    points: usize,
    min_margin: f64,
    argmin: String,
    verdict: String,
    grid_hash: String,
}

fn select(grids: Vec<Grid>, choice: GridChoice) -> Vec<Grid> {
    grids
        .into_iter()
        .filter(|g| match choice {
            GridChoice::All => true,
            GridChoice::Script => g.label == "script",
            GridChoice::Extended => g.label == "extended",
        })
        .collect()
}

fn margin_batch(constants: &Constants, rho: f64, count: usize, seed: u64) -> Result<MarginBatch, Failure> {
    let minus = SphereFunction::orthogonal([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])?;
    let mut cases: Vec<(SphereFunction, Option<SphereFunction>)> =
        vec![(SphereFunction::fopt(), None), (SphereFunction::fopt(), Some(minus))];
    for k in 0..3 {
        let mut f = ShellHarmonic::random(default_shell_radii(16), 2, 0.3, &SeededStream::new(seed, 1000 + k))?;
        recenter(&mut f, 12, 1e-12)?;
        cases.push((f.into(), None));
    }
    let mut records = Vec::new();
    for (k, (f, g)) in cases.iter().enumerate() {
        let stream = SeededStream::new(seed, k as u64);
        let margin = theorem_margin_with(constants, f, g.as_ref(), rho, &stream, count)?;
        records.push(MarginRecord {
            function: f.label(),
            pair: g.as_ref().map(|g| g.label()),
            stream_id: k as u64,
            margin,
        });
    }
    Ok(MarginBatch {
        rho,
        count,
        seed,
        records,
    })
}

fn argmin_text(argmin: &BTreeMap<String, f64>) -> String {
    argmin
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run(args: &CertifyArgs, settings: &mut Settings, ctx: &Run) -> Result<Outcome, Failure> {
    let grid = settings.value_or("grid", args.grid, GridChoice::All)?;
    let margins = settings.switch("margins", args.margins)?;
    let rho = settings.value_or("rho", args.rho, 0.05)?;
    let count = check_count("count", settings.value_or("count", args.count, 200_000)?)?;
    let defaults = Constants::default();
    let constants = Constants {
        change_of_measure: settings.value_or(
            "change_of_measure",
            args.change_of_measure,
            defaults.change_of_measure,
        )?,
        tail: settings.value_or("tail", args.tail, defaults.tail)?,
        threshold: settings.value_or("threshold", args.threshold, defaults.threshold)?,
        ..defaults
    };
    settings.finish()?;
    for (what, v) in [
        ("change_of_measure", constants.change_of_measure),
        ("tail", constants.tail),
        ("threshold", constants.threshold),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::Data(anyhow!("{what} = {v} must be finite and > 0")));
        }
    }
    let reports = vec![
        certify_rsq_phi(select(rsq_phi_default_grids(), grid), &constants)?,
        certify_tail_phi(select(tail_phi_default_grids(), grid), &constants)?,
        certify_change_of_measure(select(change_of_measure_default_grids(), grid), &constants)?,
        certify_threshold(select(threshold_default_grids(constants.threshold), grid), &constants)?,
    ];
    let margins = if margins {
        Some(margin_batch(&constants, rho, count, ctx.seed)?)
    } else {
        None
    };
    let fails = reports.iter().filter(|r| !r.verdict.is_pass()).count()
        + margins
            .as_ref()
            .map_or(0, |m| m.records.iter().filter(|r| !r.margin.holds).count());
    let consolidated = Consolidated {
        grid,
        constants,
        reports,
        margins,
        fails,
    };
    let body = match ctx.format {
        Format::Json => output::json(&consolidated)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &consolidated.reports {
                for s in &r.segments {
                    rows.push(CsvRow {
                        certifier: r.id.clone(),
                        segment: s.label.clone(),
                        points: s.points,
                        min_margin: s.min_margin,
                        argmin: argmin_text(&s.argmin),
                        verdict: format!("{:?}", s.verdict).to_uppercase(),
                        grid_hash: r.grid_hash.clone(),
                    });
                }
            }
            if let Some(m) = &consolidated.margins {
                for rec in &m.records {
                    rows.push(CsvRow {
                        certifier: "theorem_margin".into(),
                        segment: match &rec.pair {
                            Some(p) => format!("{} / {p}", rec.function),
                            None => rec.function.clone(),
                        },
                        points: m.count,
                        min_margin: rec.margin.slack,
                        argmin: format!("rho={};seed={};stream={}", m.rho, m.seed, rec.stream_id),
                        verdict: if rec.margin.holds { "PASS" } else { "FAIL" }.into(),
                        grid_hash: String::new(),
                    });
                }
            }
            output::csv(rows)?
        }
    };
    Ok(Outcome { body, fails })
}
