//! Stable-version margins: Monte Carlo left side against the profile term.

use serde::Serialize;

use super::analytic::Constants;
use crate::error::{domain, Error, Result};
use crate::measures::SeededStream;
use crate::numeric::norm3;
use crate::spectrum::phi;
use crate::stability::{default_profile, fopt_stability, noise_stability_mc, SphereFunction, StabilityEstimate};

/// Largest gap `‖E_γ f − E_γ g‖` accepted on the bilinear path.
pub const MEAN_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginKind {
    Quadratic,
    Bilinear,
}

/// Both sides of the stable inequality at one `ρ`.
///
/// Quadratic: `E⟨f(X),f(Y)⟩ − E λ ≤ (9.4ρ − 0.98) ∫ φ ‖E f_‖x‖‖² dγ`.
/// Bilinear: `E⟨f(X),g(Y)⟩ + E λ ≥ (0.98 − 9.4ρ) ∫ φ (‖E f‖² + ‖E g‖²)/2 dγ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremMargin {
    pub kind: MarginKind,
    /// Correlation as requested; negative values run the bilinear path at `−ρ`.
    pub rho: f64,
    pub stability: StabilityEstimate,
    pub fopt_stability: f64,
    /// `stability − fopt` (quadratic) or `stability + fopt` (bilinear).
    pub lhs: f64,
    /// `∫ φ ‖E f_‖x‖‖² dγ`, or the averaged `f`, `g` version.
    pub profile_term: f64,
    pub rhs: f64,
    /// `rhs − lhs` (quadratic) or `lhs − rhs` (bilinear).
    pub slack: f64,
    pub std_error: f64,
    /// `slack ≥ −4 σ̂`.
    pub holds: bool,
    pub gaussian_mean_norm: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// [`theorem_margin_with`] with the default constants.
pub fn theorem_margin(
    f: &SphereFunction,
    g: Option<&SphereFunction>,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<TheoremMargin> {
    theorem_margin_with(&Constants::default(), f, g, rho, stream, count)
}

/// Evaluates the quadratic margin (`g` absent, `0 < ρ < 0.104`) or the
/// bilinear margin (`g` present, `0 < ρ < 0.104`, `E_γ f = E_γ g`). A
/// negative `ρ` with `g` absent is reduced to the bilinear form with
/// `g(y) = f(−y)` at `−ρ`.
pub fn theorem_margin_with(
    constants: &Constants,
    f: &SphereFunction,
    g: Option<&SphereFunction>,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<TheoremMargin> {
    if !(rho.abs() > 0.0 && rho.abs() < constants.threshold) {
        return Err(domain("rho", rho, "0 < |rho| < 0.104"));
    }
    if rho < 0.0 {
        if g.is_some() {
            return Err(domain("rho", rho, "> 0 on the bilinear path"));
        }
        let reflected = f.clone().reflected();
        let mut m = margin_impl(constants, f, Some(&reflected), -rho, stream, count, false)?;
        m.rho = rho;
        m.notes.push(format!(
            "negative correlation: E<f(X), f(Y)> at rho = {rho} equals E<f(X), f(-Y)> at rho = {}",
            -rho
        ));
        return Ok(m);
    }
    margin_impl(constants, f, g, rho, stream, count, true)
}

fn margin_impl(
    constants: &Constants,
    f: &SphereFunction,
    g: Option<&SphereFunction>,
    rho: f64,
    stream: &SeededStream,
    count: usize,
    check_means: bool,
) -> Result<TheoremMargin> {
    let fopt = fopt_stability(rho)?;
    let pf = default_profile(f)?;
    let gap = constants.change_of_measure * rho - constants.tail;
    let stability = noise_stability_mc(f, g, rho, stream, count)?;
    let sigma = stability.std_error;
    let mut notes = Vec::new();
    let (kind, lhs, profile_term, rhs, slack) = match g {
        None => {
            let term = pf.integrate(|r, m| phi(rho, r) * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]));
            let lhs = stability.value - fopt;
            let rhs = gap * term;
            (MarginKind::Quadratic, lhs, term, rhs, rhs - lhs)
        }
        Some(g) => {
            let pg = default_profile(g)?;
            let diff: [f64; 3] = std::array::from_fn(|c| pf.gaussian_mean[c] - pg.gaussian_mean[c]);
            if check_means && norm3(&diff) > MEAN_MATCH_TOLERANCE {
                return Err(Error::Invalid(format!(
                    "bilinear margin needs E_gamma f = E_gamma g; they differ by {:.3e}",
                    norm3(&diff)
                )));
            }
            let term = 0.5
                * (pf.integrate(|r, m| phi(rho, r) * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]))
                    + pg.integrate(|r, m| phi(rho, r) * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2])));
            let lhs = stability.value + fopt;
            let rhs = -gap * term;
            (MarginKind::Bilinear, lhs, term, rhs, lhs - rhs)
        }
    };
    let mean_norm = norm3(&pf.gaussian_mean);
    if kind == MarginKind::Quadratic && mean_norm > MEAN_MATCH_TOLERANCE {
        notes.push(format!(
            "E_gamma f = {mean_norm:.3e} is not zero; the inequality is not claimed here"
        ));
    }
    Ok(TheoremMargin {
        kind,
        rho,
        stability,
        fopt_stability: fopt,
        lhs,
        profile_term,
        rhs,
        slack,
        std_error: sigma,
        holds: slack >= -4.0 * sigma,
        gaussian_mean_norm: mean_norm,
        notes,
    })
}
