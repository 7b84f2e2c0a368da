//! Monte Carlo estimators over ρ-correlated Gaussian pairs in ℝ³.

use std::sync::OnceLock;

use serde::Serialize;

use super::function::{SphereFunction, PROJECTION_FLAG, SPHERE_TOLERANCE};
use super::profile::{default_profile, RadialMeanProfile};
use super::{Method, StabilityEstimate};
use crate::error::{domain, Error, Result};
use crate::measures::{mc_gaussian_pairs3, SeededStream};
use crate::numeric::{dot3, norm3, RunningStats};
use crate::specfun::langevin;

/// `λ_{1,3}` at radii `(r, s)`, also for negative `ρ`.
#[inline]
pub(crate) fn lambda_pair(rho: f64, r: f64, s: f64) -> f64 {
    langevin(rho * r * s / ((1.0 - rho) * (1.0 + rho)))
}

/// First non-unit output seen by a parallel estimator.
struct Violation(OnceLock<(f64, [f64; 3])>);

impl Violation {
    fn new() -> Self {
        Self(OnceLock::new())
    }

    #[inline]
    fn eval(&self, f: &SphereFunction, x: &[f64; 3]) -> ([f64; 3], bool) {
        let (v, pre) = f.eval_with_norm(x);
        let n = norm3(&v);
        if !((n - 1.0).abs() <= SPHERE_TOLERANCE) {
            let _ = self.0.set((n, *x));
        }
        (v, (pre - 1.0).abs() > PROJECTION_FLAG)
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some((norm, point)) => Err(Error::NotSphereValued { norm, point }),
            None => Ok(()),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > -1.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain("rho", rho, "in (-1, 1)"))
    }
}

fn estimate(stats: &RunningStats, stream: &SeededStream) -> StabilityEstimate {
    StabilityEstimate {
        method: Method::Mc,
        value: stats.mean(),
        std_error: stats.std_error(),
        count: stats.count(),
        seed: Some(stream.seed),
        flags: Vec::new(),
    }
}

fn flag_fraction(flags: &mut Vec<String>, what: &str, stats: &RunningStats) {
    let frac = stats.mean();
    if frac > 0.0 {
        flags.push(format!("{what} at {:.4}% of samples", 100.0 * frac));
    }
}

/// `E⟨f(X), g(Y)⟩` over `count` ρ-correlated pairs; `g` defaults to `f`.
pub fn noise_stability_mc(
    f: &SphereFunction,
    g: Option<&SphereFunction>,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<StabilityEstimate> {
    check_rho(rho)?;
    let g = g.unwrap_or(f);
    let bad = Violation::new();
    let [inner, flagged] = mc_gaussian_pairs3(rho, stream, count, |x, y| {
        let (fx, px) = bad.eval(f, x);
        let (gy, py) = bad.eval(g, y);
        [dot3(&fx, &gy), if px || py { 1.0 } else { 0.0 }]
    })?;
    bad.check()?;
    let mut est = estimate(&inner, stream);
    flag_fraction(&mut est.flags, "projection flagged", &flagged);
    Ok(est)
}

fn quadratic_term(profile: &RadialMeanProfile, rho: f64, x: &[f64; 3], y: &[f64; 3]) -> (f64, bool) {
    let (r, s) = (norm3(x), norm3(y));
    let lam = lambda_pair(rho, r, s);
    let (mx, cx) = profile.at(r);
    let (my, cy) = profile.at(s);
    (lam + dot3(&mx, &my) - dot3(&mx, &mx) * lam, cx || cy)
}

fn bilinear_term(pf: &RadialMeanProfile, pg: &RadialMeanProfile, rho: f64, x: &[f64; 3], y: &[f64; 3]) -> (f64, bool) {
    let (r, s) = (norm3(x), norm3(y));
    let lam = lambda_pair(rho, r, s);
    let (mfx, c1) = pf.at(r);
    let (mgx, c2) = pg.at(r);
    let (mgy, c3) = pg.at(s);
    (
        -lam + dot3(&mfx, &mgy) + 0.5 * (dot3(&mfx, &mfx) + dot3(&mgx, &mgx)) * lam,
        c1 || c2 || c3,
    )
}

fn check_positive_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain("rho", rho, "in (0, 1)"))
    }
}

/// `E[λ + ⟨E f_‖X‖, E f_‖Y‖⟩ − ‖E f_‖X‖‖² λ]` with `λ = λ_{1,3}^{‖X‖,‖Y‖}`,
/// using a precomputed profile.
pub fn quadratic_bound_rhs_with(
    profile: &RadialMeanProfile,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<StabilityEstimate> {
    check_positive_rho(rho)?;
    let [v, clamped] = mc_gaussian_pairs3(rho, stream, count, |x, y| {
        let (t, c) = quadratic_term(profile, rho, x, y);
        [t, if c { 1.0 } else { 0.0 }]
    })?;
    let mut est = estimate(&v, stream);
    flag_fraction(&mut est.flags, "profile clamped", &clamped);
    Ok(est)
}

/// [`quadratic_bound_rhs_with`] on the default profile of `f`.
pub fn quadratic_bound_rhs(
    f: &SphereFunction,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<StabilityEstimate> {
    quadratic_bound_rhs_with(&default_profile(f)?, rho, stream, count)
}

/// `E[−λ + ⟨E f_‖X‖, E g_‖Y‖⟩ + (‖E f_‖X‖‖² + ‖E g_‖X‖‖²) λ/2]`.
pub fn bilinear_bound_rhs_with(
    pf: &RadialMeanProfile,
    pg: &RadialMeanProfile,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<StabilityEstimate> {
    check_positive_rho(rho)?;
    let [v, clamped] = mc_gaussian_pairs3(rho, stream, count, |x, y| {
        let (t, c) = bilinear_term(pf, pg, rho, x, y);
        [t, if c { 1.0 } else { 0.0 }]
    })?;
    let mut est = estimate(&v, stream);
    flag_fraction(&mut est.flags, "profile clamped", &clamped);
    Ok(est)
}

/// [`bilinear_bound_rhs_with`] on the default profiles of `f` and `g`.
pub fn bilinear_bound_rhs(
    f: &SphereFunction,
    g: &SphereFunction,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<StabilityEstimate> {
    bilinear_bound_rhs_with(&default_profile(f)?, &default_profile(g)?, rho, stream, count)
}

/// Stability and bound evaluated on the same pairs, with the standard error
/// of their difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub stability: StabilityEstimate,
    pub bound: StabilityEstimate,
    /// `bound − stability` (upper bound) or `stability − bound` (lower bound);
    /// nonnegative up to noise when the inequality holds.
    pub slack: StabilityEstimate,
    /// `slack ≥ −4 σ̂`.
    pub holds: bool,
}

fn lemma_check<F>(
    f: &SphereFunction,
    g: &SphereFunction,
    rho: f64,
    stream: &SeededStream,
    count: usize,
    upper: bool,
    bound: F,
) -> Result<LemmaCheck>
where
    F: Fn(&[f64; 3], &[f64; 3]) -> f64 + Sync,
{
    check_positive_rho(rho)?;
    let bad = Violation::new();
    let [stab, rhs, slack] = mc_gaussian_pairs3(rho, stream, count, |x, y| {
        let (fx, _) = bad.eval(f, x);
        let (gy, _) = bad.eval(g, y);
        let s = dot3(&fx, &gy);
        let b = bound(x, y);
        [s, b, if upper { b - s } else { s - b }]
    })?;
    bad.check()?;
    let slack = estimate(&slack, stream);
    Ok(LemmaCheck {
        stability: estimate(&stab, stream),
        bound: estimate(&rhs, stream),
        holds: slack.value >= -4.0 * slack.std_error,
        slack,
    })
}

/// `E⟨f(X), f(Y)⟩ ≤ E[λ + ⟨E f_‖X‖, E f_‖Y‖⟩ − ‖E f_‖X‖‖² λ]` on shared samples.
pub fn quadratic_lemma_check(f: &SphereFunction, rho: f64, stream: &SeededStream, count: usize) -> Result<LemmaCheck> {
    let profile = default_profile(f)?;
    lemma_check(f, f, rho, stream, count, true, |x, y| {
        quadratic_term(&profile, rho, x, y).0
    })
}

/// `E⟨f(X), g(Y)⟩ ≥ E[−λ + ⟨E f, E g⟩ + (‖E f‖² + ‖E g‖²) λ/2]` on shared samples.
pub fn bilinear_lemma_check(
    f: &SphereFunction,
    g: &SphereFunction,
    rho: f64,
    stream: &SeededStream,
    count: usize,
) -> Result<LemmaCheck> {
    let (pf, pg) = (default_profile(f)?, default_profile(g)?);
    lemma_check(f, g, rho, stream, count, false, |x, y| {
        bilinear_term(&pf, &pg, rho, x, y).0
    })
}
