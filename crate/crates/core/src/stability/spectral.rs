//! Deterministic stability values: the `f_opt` benchmark by nested
//! quadrature and the Funk–Hecke spectral form on a single pair of shells.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quadrature::{chi3_rule, gauss_legendre, SphericalGrid};
use crate::specfun::{bessel_ratio, langevin};
use crate::spectrum::{concentration, lambda_d_bessel};
use crate::sphharm::{harmonic_coefficients, spherical_projection_norms};

use super::{Method, SphereFunction, StabilityEstimate};

const RADIAL_MAX: f64 = 12.0;
const RADIAL_POINTS: usize = 12;
const INNER_POINTS: usize = 16;

/// `E⟨X/‖X‖, Y/‖Y‖⟩ = E λ_{1,3}^{‖X‖,‖Y‖}` for ρ-correlated standard
/// Gaussians in ℝ³.
///
/// With `X = R·u` and `Y = ρX + √(1−ρ²) Z`, `‖Z‖ = Q`, the angle between
/// `X` and `Z` is uniform in cosine, so after `t = ‖Y‖` the innermost
/// average is `(2AB)⁻¹ ∫_{|A−B|}^{A+B} t L(kt) dt` with `A = ρR`,
/// `B = √(1−ρ²) Q`, `k = ρR/(1−ρ²)` and `L` the Langevin function. The
/// outer integrals over `R` and `Q` use chi(3) rules, with a breakpoint at
/// `A = B`.
pub fn fopt_stability(rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(domain("rho", rho, "in (-1, 1)"));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if rho < 0.0 {
        return fopt_stability(-rho).map(|v| -v);
    }
    let s2 = (1.0 - rho) * (1.0 + rho);
    let sigma = s2.sqrt();
    let gl = gauss_legendre(INNER_POINTS);
    let outer = chi3_rule(&[], RADIAL_MAX, RADIAL_POINTS);
    let mut total = 0.0;
    for (&r, &wr) in outer.nodes.iter().zip(&outer.weights) {
        let a = rho * r;
        let k = rho * r / s2;
        let q_rule = chi3_rule(&[a / sigma], RADIAL_MAX, RADIAL_POINTS);
        let mut inner = 0.0;
        for (&q, &wq) in q_rule.nodes.iter().zip(&q_rule.weights) {
            let b = sigma * q;
            let (lo, hi) = ((a - b).abs(), a + b);
            let avg = if a * b == 0.0 {
                langevin(k * hi)
            } else {
                let panels = ((hi - lo) * k).ceil().max(1.0) as usize;
                let h = (hi - lo) / panels as f64;
                let mut acc = 0.0;
                for p in 0..panels {
                    let mid = lo + (p as f64 + 0.5) * h;
                    for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                        let tt = mid + 0.5 * h * t;
                        acc += 0.5 * h * w * tt * langevin(k * tt);
                    }
                }
                acc / (2.0 * a * b)
            };
            inner += wq * avg;
        }
        total += wr * inner;
    }
    if !total.is_finite() {
        return Err(Error::Evaluation(format!("fopt stability not finite at rho = {rho}")));
    }
    Ok(total)
}

/// [`fopt_stability`] as an estimate record.
pub fn fopt_stability_estimate(rho: f64) -> Result<StabilityEstimate> {
    Ok(StabilityEstimate::exact(Method::Quadrature, fopt_stability(rho)?))
}

/// `‖Proj₀ F‖² + Σ_{d=1}^{D} λ_{d,3}^{r,s} ‖Proj_d F‖²` with the projections
/// computed on the given grid.
pub fn spherical_noise_stability_on<const K: usize, F>(
    f: F,
    rho: f64,
    r: f64,
    s: f64,
    max_degree: usize,
    grid: &SphericalGrid,
) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> [f64; K],
{
    if !(rho > -1.0 && rho < 1.0) {
        return Err(domain("rho", rho, "in (-1, 1)"));
    }
    let a = concentration(rho.abs(), r, s)?;
    let norms = spherical_projection_norms(f, max_degree, grid)?;
    let mut total = norms[0];
    for (d, &n) in norms.iter().enumerate().skip(1) {
        let mut lam = lambda_d_bessel(d as u32, 3, a)?;
        if rho < 0.0 && d % 2 == 1 {
            lam = -lam;
        }
        total += lam * n;
    }
    Ok(total)
}

/// [`spherical_noise_stability_on`] with a product rule exact to degree
/// `2D + 24`.
pub fn spherical_noise_stability<const K: usize, F>(f: F, rho: f64, r: f64, s: f64, max_degree: usize) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> [f64; K],
{
    let grid = SphericalGrid::exact_for(2 * max_degree + 24);
    spherical_noise_stability_on(f, rho, r, s, max_degree, &grid)
}

/// Radial Gauss points per panel of [`gaussian_spectral_stability`].
pub const SPECTRAL_RADIAL_POINTS: usize = 4;

/// `E⟨f(X), g(Y)⟩` from the Funk–Hecke expansion on every pair of radial
/// nodes: `∫∫ p(r,s) Σ_{d ≤ D} λ_{d,3}^{r,s} ⟨F_d(r), G_d(s)⟩ dr ds` with
/// `p` the joint density of `(‖X‖, ‖Y‖)`. The harmonic tail above `D` is
/// dropped, which is flagged in the record.
pub fn gaussian_spectral_stability(
    f: &SphereFunction,
    g: Option<&SphereFunction>,
    rho: f64,
    max_degree: usize,
) -> Result<StabilityEstimate> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(domain("rho", rho, "in (-1, 1)"));
    }
    let mut breaks = f.radial_breaks();
    if let Some(g) = g {
        breaks.extend(g.radial_breaks());
    }
    let rule = chi3_rule(&breaks, RADIAL_MAX, SPECTRAL_RADIAL_POINTS);
    let grid = SphericalGrid::exact_for(2 * max_degree + 24);
    let coefficients = |h: &SphereFunction| -> Result<Vec<Vec<[f64; 3]>>> {
        rule.nodes
            .par_iter()
            .map(|&r| harmonic_coefficients(|u| h.eval(&[r * u[0], r * u[1], r * u[2]]), max_degree, &grid))
            .collect()
    };
    let cf = coefficients(f)?;
    let cg = match g {
        Some(g) => coefficients(g)?,
        None => cf.clone(),
    };
    let s2 = (1.0 - rho) * (1.0 + rho);
    let rows: Vec<Result<f64>> = (0..rule.len())
        .into_par_iter()
        .map(|i| {
            let r = rule.nodes[i];
            let mut row = 0.0;
            for (j, &s) in rule.nodes.iter().enumerate() {
                let a = rho.abs() * r * s / s2;
                let log_sinhc = if a > 1e-8 {
                    a + (-(-2.0 * a).exp_m1() / (2.0 * a)).ln()
                } else {
                    a * a / 6.0
                };
                let ratio = (-1.5 * s2.ln() - (r * r + s * s) * rho * rho / (2.0 * s2) + log_sinhc).exp();
                let mut lam = 1.0;
                let mut acc = 0.0;
                for d in 0..=max_degree {
                    if d > 0 {
                        lam *= bessel_ratio(0.5 + (d - 1) as f64, a)?;
                        if lam < 1e-18 {
                            break;
                        }
                    }
                    let inner: f64 = cf[i][d * d..(d + 1) * (d + 1)]
                        .iter()
                        .zip(&cg[j][d * d..(d + 1) * (d + 1)])
                        .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
                        .sum();
                    let sign = if rho < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
                    acc += sign * lam * inner;
                }
                row += rule.weights[j] * ratio * acc;
            }
            Ok(rule.weights[i] * row)
        })
        .collect();
    let mut total = 0.0;
    for row in rows {
        total += row?;
    }
    if !total.is_finite() {
        return Err(Error::Evaluation(format!(
            "spectral stability not finite at rho = {rho}"
        )));
    }
    let mut est = StabilityEstimate::exact(Method::Spectral, total);
    est.flags.push(format!("harmonic degrees truncated at {max_degree}"));
    Ok(est)
}
