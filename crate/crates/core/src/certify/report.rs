//! Certificate reports: a margin evaluated on labeled grids, reduced to its
//! minimum in canonical grid order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_margin(margin: f64, tolerance: f64) -> Self {
        if margin >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// A named grid of points, each a tuple of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub label: String,
    pub description: String,
    pub axes: Vec<&'static str>,
    pub points: Vec<Vec<f64>>,
}

impl Grid {
    /// Cartesian product of two axes, first axis outermost.
    pub fn product(label: &str, description: String, axes: [&'static str; 2], a: &[f64], b: &[f64]) -> Self {
        let points = a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect();
        Self {
            label: label.into(),
            description,
            axes: axes.to_vec(),
            points,
        }
    }

    pub fn line(label: &str, description: String, axis: &'static str, a: &[f64]) -> Self {
        Self {
            label: label.into(),
            description,
            axes: vec![axis],
            points: a.iter().map(|&x| vec![x]).collect(),
        }
    }
}

/// Result on one labeled grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub description: String,
    pub points: usize,
    pub min_margin: f64,
    pub argmin: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

/// Outcome of a certifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub id: String,
    /// The inequality, in words.
    pub claim: String,
    pub grid: String,
    pub grid_hash: String,
    pub segments: Vec<Segment>,
    pub min_margin: f64,
    pub argmin: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn segment(&self, label: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.label == label)
    }
}

/// SHA-256 over the id, segment labels and every coordinate (little-endian).
pub fn grid_hash(id: &str, grids: &[Grid]) -> String {
    let mut h = Sha256::new();
    h.update(id.as_bytes());
    for g in grids {
        h.update([0u8]);
        h.update(g.label.as_bytes());
        for p in &g.points {
            for v in p {
                h.update(v.to_le_bytes());
            }
        }
    }
    hex::encode(h.finalize())
}

/// Evaluates `margin` on every grid point (in parallel) and assembles the
/// report. Non-finite margins are evaluation errors, never FAILs.
pub fn certify_grids<F>(id: &str, claim: &str, grids: Vec<Grid>, tolerance: f64, margin: F) -> Result<CertificateReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if grids.is_empty() || grids.iter().any(|g| g.points.is_empty()) {
        return Err(Error::Invalid(format!("{id}: empty grid")));
    }
    let mut segments = Vec::with_capacity(grids.len());
    let mut best: Option<(f64, BTreeMap<String, f64>)> = None;
    for g in &grids {
        let values: Vec<f64> = g.points.par_iter().map(|p| margin(p)).collect::<Result<Vec<f64>>>()?;
        let mut min_idx = 0;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                let at: Vec<String> = g
                    .axes
                    .iter()
                    .zip(&g.points[i])
                    .map(|(a, x)| format!("{a} = {x}"))
                    .collect();
                return Err(Error::Evaluation(format!("{id}: margin is {v} at {}", at.join(", "))));
            }
            if *v < values[min_idx] {
                min_idx = i;
            }
        }
        let argmin: BTreeMap<String, f64> = g
            .axes
            .iter()
            .map(|a| a.to_string())
            .zip(g.points[min_idx].iter().copied())
            .collect();
        let min_margin = values[min_idx];
        if best.as_ref().is_none_or(|(m, _)| min_margin < *m) {
            best = Some((min_margin, argmin.clone()));
        }
        segments.push(Segment {
            label: g.label.clone(),
            description: g.description.clone(),
            points: g.points.len(),
            min_margin,
            argmin,
            verdict: Verdict::from_margin(min_margin, tolerance),
        });
    }
    let (min_margin, argmin) = best.expect("at least one grid");
    Ok(CertificateReport {
        id: id.into(),
        claim: claim.into(),
        grid: grids
            .iter()
            .map(|g| format!("{}: {}", g.label, g.description))
            .collect::<Vec<_>>()
            .join("; "),
        grid_hash: grid_hash(id, &grids),
        segments,
        min_margin,
        argmin,
        tolerance,
        verdict: Verdict::from_margin(min_margin, tolerance),
        summary: BTreeMap::new(),
        notes: Vec::new(),
    })
}
