use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use spherestab::specfun::langevin;
use spherestab::spectrum::{lambda_d_bessel, lambda_d_quadrature, EigenvalueQuery};

use crate::config::Settings;
use crate::failure::Failure;
use crate::output::{self, Format};
use crate::{Common, Outcome, Run};

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Largest degree d (rows run over 0..=degree).
    #[arg(long)]
    degree: Option<u32>,
    /// Dimensions n.
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    /// Correlations ρ in [0, 1).
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    /// Radii r.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    /// Radii s.
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct Row {
    d: u32,
    n: u32,
    rho: f64,
    r: f64,
    s: f64,
    lambda_quadrature: f64,
    lambda_closed_form_if_n3: Option<f64>,
    abs_diff: Option<f64>,
}

fn row(q: EigenvalueQuery) -> Result<Row, Failure> {
    let quad = lambda_d_quadrature(&q)?;
    let closed = if q.n == 3 {
        let a = q.concentration()?;
        Some(if q.d == 1 {
            langevin(a)
        } else {
            lambda_d_bessel(q.d, 3, a)?
        })
    } else {
        None
    };
    Ok(Row {
        d: q.d,
        n: q.n,
        rho: q.rho,
        r: q.r,
        s: q.s,
        lambda_quadrature: quad,
        lambda_closed_form_if_n3: closed,
        abs_diff: closed.map(|c| (c - quad).abs()),
    })
}

pub fn run(args: &EigenArgs, settings: &mut Settings, ctx: &Run) -> Result<Outcome, Failure> {
    let degree = settings.value_or("degree", args.degree, 4)?;
    let ns = settings.list("n", args.n.clone(), vec![3])?;
    let rhos = settings.list("rho", args.rho.clone(), vec![0.05, 0.1, 0.3, 0.6])?;
    let rs = settings.list("r", args.r.clone(), vec![0.5, 1.0, 2.0, 4.0])?;
    let ss = settings.list("s", args.s.clone(), vec![0.5, 1.0, 2.0, 4.0])?;
    settings.finish()?;
    let mut queries = Vec::new();
    for &rho in &rhos {
        for &r in &rs {
            for &s in &ss {
                for &n in &ns {
                    for d in 0..=degree {
                        queries.push(EigenvalueQuery::new(d, n, rho, r, s));
                    }
                }
            }
        }
    }
    let rows = queries.into_par_iter().map(row).collect::<Result<Vec<_>, _>>()?;
    let body = match ctx.format {
        Format::Csv => output::csv(&rows)?,
        Format::Json => output::json(&rows)?,
    };
    Ok(Outcome { body, fails: 0 })
}
