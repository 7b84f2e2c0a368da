//! Grid certification of the scalar inequalities behind the constants
//! `9.4ρ`, `0.98` and the threshold `ρ < 0.104`.

use serde::{Deserialize, Serialize};

use super::report::{certify_grids, CertificateReport, Grid};
use crate::error::{domain, Result};
use crate::measures::change_of_measure_constant;
use crate::numeric::{geomspace, linspace};
use crate::specfun::mills_ratio;
use crate::spectrum::phi;

/// Constants under certification. Replacing one with a wrong value must
/// produce a FAIL; this is how the harness itself is tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Change-of-measure slope (`9.4`).
    pub change_of_measure: f64,
    /// Tail factor (`0.98`).
    pub tail: f64,
    /// Claimed correlation threshold (`0.104`).
    pub threshold: f64,
    /// Upper end of the change-of-measure range (`1/9`).
    pub change_of_measure_rho_max: f64,
    /// Upper end of the tail-bound range (`1/5`).
    pub tail_rho_max: f64,
    /// Evaluation-error budget of the analytic certifiers.
    pub tolerance: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            change_of_measure: 9.4,
            tail: 0.98,
            threshold: 0.104,
            change_of_measure_rho_max: 1.0 / 9.0,
            tail_rho_max: 0.2,
            tolerance: 1e-10,
        }
    }
}

impl Constants {
    /// `9.4ρ − 0.98`; negative below the crossover.
    pub fn threshold_margin(&self, rho: f64) -> f64 {
        self.change_of_measure * rho - self.tail
    }

    /// `0.98 / 9.4`.
    pub fn crossover(&self) -> f64 {
        self.tail / self.change_of_measure
    }
}

fn check_rhos(values: &[f64], max: f64, what: &'static str) -> Result<()> {
    for &rho in values {
        if !(rho > 0.0 && rho < max) {
            return Err(domain(what, rho, "inside the certified range"));
        }
    }
    Ok(())
}

/// `3r/ρ + r² − r²/φ(ρ, r)`.
pub fn rsq_phi_margin(rho: f64, r: f64) -> f64 {
    3.0 * r / rho + r * r - r * r / phi(rho, r)
}

/// `√(2/π) M(3√(1−ρ²)/(2ρs)) − c·φ(ρ, s)` with `M` the Mills ratio, i.e.
/// `√(2/π) e^{x²/2} ∫_x^∞ e^{−t²/2} dt` evaluated without overflow.
pub fn tail_phi_margin(rho: f64, s: f64, tail: f64) -> f64 {
    let x = 3.0 * ((1.0 - rho) * (1.0 + rho)).sqrt() / (2.0 * rho * s);
    (2.0 / std::f64::consts::PI).sqrt() * mills_ratio(x) - tail * phi(rho, s)
}

/// `r²/φ(ρ,r) ≤ 3r/ρ + r²` on the given grids.
pub fn certify_rsq_phi(grids: Vec<Grid>, constants: &Constants) -> Result<CertificateReport> {
    for g in &grids {
        check_rhos(
            &g.points.iter().map(|p| p[0]).collect::<Vec<_>>(),
            constants.change_of_measure_rho_max,
            "rho",
        )?;
    }
    let mut report = certify_grids(
        "rsq_phi",
        "r^2/phi(rho, r) <= 3r/rho + r^2",
        grids,
        constants.tolerance,
        |p| Ok(rsq_phi_margin(p[0], p[1])),
    )?;
    report
        .notes
        .push("as r -> 0 the margin behaves like r^2, so the minimum sits at the small-r end".into());
    Ok(report)
}

/// The script grid (`ρ = 0.1`, `r = linspace(0.1, 20, 1000)`) and a sweep of
/// `ρ ∈ {0.01, …, 0.11}` over `r ∈ [0.01, 100]`.
pub fn rsq_phi_default_grids() -> Vec<Grid> {
    let rhos: Vec<f64> = (1..=11).map(|i| i as f64 / 100.0).collect();
    vec![
        Grid::product(
            "script",
            "rho = 0.1, r = linspace(0.1, 20, 1000)".into(),
            ["rho", "r"],
            &[0.1],
            &linspace(0.1, 20.0, 1000),
        ),
        Grid::product(
            "extended",
            "rho in {0.01, ..., 0.11}, r = geomspace(0.01, 100, 2000)".into(),
            ["rho", "r"],
            &rhos,
            &geomspace(0.01, 100.0, 2000),
        ),
    ]
}

/// `√(2/π) e^{9(1−ρ²)/(8s²ρ²)} ∫_{3√(1−ρ²)/(2ρs)}^∞ e^{−t²/2} dt ≥ 0.98 φ(ρ, s)`.
pub fn certify_tail_phi(grids: Vec<Grid>, constants: &Constants) -> Result<CertificateReport> {
    for g in &grids {
        check_rhos(
            &g.points.iter().map(|p| p[0]).collect::<Vec<_>>(),
            constants.tail_rho_max,
            "rho",
        )?;
        if let Some(p) = g.points.iter().find(|p| !(p[1] > 0.0)) {
            return Err(domain("s", p[1], "> 0"));
        }
    }
    let tail = constants.tail;
    let mut report = certify_grids(
        "tail_phi",
        "sqrt(2/pi) exp(x^2/2) int_x^inf exp(-t^2/2) dt >= 0.98 phi(rho, s), x = 3 sqrt(1-rho^2)/(2 rho s)",
        grids,
        constants.tolerance,
        |p| Ok(tail_phi_margin(p[0], p[1], tail)),
    )?;
    report
        .notes
        .push("s = 0 is dropped from the script grid; both sides are undefined there".into());
    report
        .notes
        .push(format!("as s -> infinity the margin tends to 1 - {tail}"));
    Ok(report)
}

/// The script grid (`ρ = 0.03`, `s = linspace(0, 1000, 1000)` without `0`)
/// and a sweep of `ρ ∈ {0.01, …, 0.19}` over `s ∈ [0.01, 1000]`.
pub fn tail_phi_default_grids() -> Vec<Grid> {
    let rhos: Vec<f64> = (1..=19).map(|i| i as f64 / 100.0).collect();
    let script: Vec<f64> = linspace(0.0, 1000.0, 1000).into_iter().skip(1).collect();
    vec![
        Grid::product(
            "script",
            "rho = 0.03, s = linspace(0, 1000, 1000) without s = 0".into(),
            ["rho", "s"],
            &[0.03],
            &script,
        ),
        Grid::product(
            "extended",
            "rho in {0.01, ..., 0.19}, s = geomspace(0.01, 1000, 2000)".into(),
            ["rho", "s"],
            &rhos,
            &geomspace(0.01, 1000.0, 2000),
        ),
    ]
}

/// Closed-form change-of-measure constant `≤ 9.4ρ`; also reports the
/// largest ratio `C(ρ)/ρ` seen.
pub fn certify_change_of_measure(grids: Vec<Grid>, constants: &Constants) -> Result<CertificateReport> {
    let mut sup_ratio = f64::NEG_INFINITY;
    let mut sup_at = f64::NAN;
    for g in &grids {
        for p in &g.points {
            let rho = p[0];
            if !(rho > 0.0 && rho < constants.change_of_measure_rho_max) {
                return Err(domain("rho", rho, "in (0, 1/9)"));
            }
            let ratio = change_of_measure_constant(rho)? / rho;
            if ratio > sup_ratio {
                sup_ratio = ratio;
                sup_at = rho;
            }
        }
    }
    let slope = constants.change_of_measure;
    let mut report = certify_grids(
        "change_of_measure",
        "closed-form change-of-measure constant C(rho) <= 9.4 rho",
        grids,
        constants.tolerance,
        |p| Ok(slope * p[0] - change_of_measure_constant(p[0])?),
    )?;
    report.summary.insert("sup_ratio".into(), sup_ratio);
    report.summary.insert("sup_ratio_rho".into(), sup_at);
    report.summary.insert("slope".into(), slope);
    Ok(report)
}

/// `ρ = 0.001, 0.002, …, 0.111` and a geometric sweep down to `1e-5`.
pub fn change_of_measure_default_grids() -> Vec<Grid> {
    let script: Vec<f64> = (1..=111).map(|i| i as f64 * 1e-3).collect();
    vec![
        Grid::line("script", "rho = 0.001:0.001:0.111".into(), "rho", &script),
        Grid::line(
            "extended",
            "rho = geomspace(1e-5, 0.1111, 500)".into(),
            "rho",
            &geomspace(1e-5, 0.1111, 500),
        ),
    ]
}

/// `ρ = 0.104` itself and a uniform grid of `(0, 0.104]`.
pub fn threshold_default_grids(threshold: f64) -> Vec<Grid> {
    let t = threshold;
    vec![
        Grid::line("script", format!("rho = {t}"), "rho", &[t]),
        Grid::line(
            "extended",
            format!("rho = linspace({}, {t}, 1040)", t / 1040.0),
            "rho",
            &linspace(t / 1040.0, t, 1040),
        ),
    ]
}

/// `9.4ρ − 0.98 < 0` for every `ρ ≤ 0.104`: the margin is `0.98 − 9.4ρ`
/// on the grids, and the exact crossover is reported.
pub fn certify_threshold(grids: Vec<Grid>, constants: &Constants) -> Result<CertificateReport> {
    let t = constants.threshold;
    let c = *constants;
    let mut report = certify_grids(
        "threshold",
        "9.4 rho - 0.98 < 0 for all rho <= 0.104",
        grids,
        0.0,
        |p| Ok(-c.threshold_margin(p[0])),
    )?;
    let crossover = constants.crossover();
    report.summary.insert("crossover".into(), crossover);
    report.summary.insert("threshold".into(), t);
    report.summary.insert("crossover_minus_threshold".into(), crossover - t);
    if report.min_margin <= 0.0 {
        report.verdict = super::report::Verdict::Fail;
    }
    report.notes.push(format!(
        "above the crossover {crossover:.7} the margin term has the wrong sign; that region is open"
    ));
    Ok(report)
}

/// All four analytic certifiers on their default grids.
pub fn certify_all(constants: &Constants) -> Result<Vec<CertificateReport>> {
    Ok(vec![
        certify_rsq_phi(rsq_phi_default_grids(), constants)?,
        certify_tail_phi(tail_phi_default_grids(), constants)?,
        certify_change_of_measure(change_of_measure_default_grids(), constants)?,
        certify_threshold(threshold_default_grids(constants.threshold), constants)?,
    ])
}
