use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use serde::Serialize;
use spherestab::measures::SeededStream;
use spherestab::qmaxcut::{
    brute_force_maxcut, multi_restart, product_state_energy, tensor_oracle_energy, BlochAssignment, MaxCut,
    WeightedGraph, MAX_BRUTE_FORCE, MAX_ORACLE_QUBITS,
};

use crate::config::Settings;
use crate::failure::Failure;
use crate::output::{self, Format};
use crate::{Common, Outcome, Run};

#[derive(Debug, Args)]
pub struct QmaxcutArgs {
    /// Edge list `i j w` (0-indexed), optional `n N` line, `#` comments.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// JSON array of Bloch vectors to evaluate instead of optimizing.
    #[arg(long)]
    bloch: Option<PathBuf>,
    /// Local-search restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Sweep cap per restart.
    #[arg(long)]
    iters: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct Oracle {
    energy: f64,
    abs_diff: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    n: usize,
    edges: usize,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    energy: f64,
    assignment: BlochAssignment,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Oracle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    maxcut: Option<MaxCut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    flagged: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restart_energies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_restart: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    vertex: usize,
    x: f64,
    y: f64,
    z: f64,
}

fn load_bloch(path: &Path) -> Result<BlochAssignment, Failure> {
    let text = output::read(path)?;
    let raw: Vec<[f64; 3]> = serde_json::from_str(&text).map_err(|e| {
        Failure::Data(anyhow!(
            "{}: {e} (line {}, column {}); expected a JSON array of [x, y, z] triples",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    BlochAssignment::new(raw).map_err(|e| Failure::Data(anyhow!("{}: {e}", path.display())))
}

pub fn run(args: &QmaxcutArgs, settings: &mut Settings, ctx: &Run) -> Result<Outcome, Failure> {
    let graph_path = settings
        .value::<PathBuf>("graph", args.graph.clone())?
        .ok_or_else(|| Failure::Data(anyhow!("--graph is required")))?;
    let bloch = settings.value::<PathBuf>("bloch", args.bloch.clone())?;
    let restarts = settings.value_or("restarts", args.restarts, 16)?;
    let iters = settings.value_or("iters", args.iters, 1000)?;
    settings.finish()?;
    let graph = WeightedGraph::parse(&output::read(&graph_path)?)
        .map_err(|e| Failure::Data(anyhow!("{}: {e}", graph_path.display())))?;
    let n = graph.n();
    let mut report = match bloch {
        Some(path) => {
            let assignment = load_bloch(&path)?;
            Report {
                n,
                edges: graph.edges().count(),
                mode: "evaluate",
                seed: None,
                energy: product_state_energy(&graph, &assignment)?,
                assignment,
                oracle: None,
                maxcut: None,
                flagged: Vec::new(),
                restart_energies: None,
                best_restart: None,
                sweeps: None,
                converged: None,
            }
        }
        None => {
            let runs = multi_restart(&graph, &SeededStream::new(ctx.seed, 0), restarts, iters)?;
            Report {
                n,
                edges: graph.edges().count(),
                mode: "optimize",
                seed: Some(ctx.seed),
                energy: runs.best.energy,
                assignment: runs.best.assignment.clone(),
                oracle: None,
                maxcut: None,
                flagged: runs.best.flagged.clone(),
                restart_energies: Some(runs.energies),
                best_restart: Some(runs.best_restart),
                sweeps: Some(runs.best.sweeps),
                converged: Some(runs.best.converged),
            }
        }
    };
    if n <= MAX_ORACLE_QUBITS {
        let energy = tensor_oracle_energy(&graph, &report.assignment.spinors())?;
        report.oracle = Some(Oracle {
            energy,
            abs_diff: (energy - report.energy).abs(),
        });
    }
    if n <= MAX_BRUTE_FORCE {
        report.maxcut = Some(brute_force_maxcut(&graph)?);
    }
    let body = match ctx.format {
        Format::Json => output::json(&report)?,
        Format::Csv => output::csv(
            report
                .assignment
                .vectors()
                .iter()
                .enumerate()
                .map(|(vertex, a)| CsvRow {
                    vertex,
                    x: a[0],
                    y: a[1],
                    z: a[2],
                }),
        )?,
    };
    Ok(Outcome { body, fails: 0 })
}
