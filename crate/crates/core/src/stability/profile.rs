//! Radial mean profiles `r ↦ E f_r`, the average of `f` over the sphere of
//! radius `r`.

use serde::Serialize;

use super::function::{default_shell_radii, SphereFunction};
use crate::error::{Error, Result};
use crate::numeric::norm3;
use crate::quadrature::{chi3_rule, SphericalGrid};

/// Subdivisions of each shell interval in the default profile grid.
pub const PROFILE_REFINEMENT: usize = 4;

/// Spherical means of `f` on a grid of radii, linearly interpolated between
/// grid points and clamped outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialMeanProfile {
    pub radii: Vec<f64>,
    pub means: Vec<[f64; 3]>,
    pub norms: Vec<f64>,
    /// `E_γ f`, integrated directly (not from the interpolant).
    pub gaussian_mean: [f64; 3],
    pub sphere_degree: usize,
}

impl RadialMeanProfile {
    /// `E f_r` by linear interpolation, and whether `r` was clamped.
    pub fn at(&self, r: f64) -> ([f64; 3], bool) {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return (self.means[0], r < self.radii[0]);
        }
        if r >= self.radii[n - 1] {
            return (self.means[n - 1], r > self.radii[n - 1]);
        }
        let hi = self.radii.partition_point(|&t| t <= r);
        let lo = hi - 1;
        let w = (r - self.radii[lo]) / (self.radii[hi] - self.radii[lo]);
        let (a, b) = (self.means[lo], self.means[hi]);
        (std::array::from_fn(|c| (1.0 - w) * a[c] + w * b[c]), false)
    }

    /// `∫₀^∞ g(r, E f_r) χ₃(r) dr` over the interpolated profile.
    pub fn integrate<G: Fn(f64, &[f64; 3]) -> f64>(&self, g: G) -> f64 {
        let rule = chi3_rule(&self.radii, 12.0, 8);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * g(r, &self.at(r).0))
            .sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Spherical means of `f` at each radius by a product rule exact to degree
/// `sphere_degree`.
pub fn radial_mean_profile(f: &SphereFunction, radii: &[f64], sphere_degree: usize) -> Result<RadialMeanProfile> {
    if radii.is_empty() {
        return Err(Error::Invalid("profile needs at least one radius".into()));
    }
    if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid(
            "profile radii must be positive and strictly increasing".into(),
        ));
    }
    let grid = SphericalGrid::exact_for(sphere_degree);
    let means: Vec<[f64; 3]> = radii
        .iter()
        .map(|&r| grid.mean(|u| f.eval(&[r * u[0], r * u[1], r * u[2]])))
        .collect();
    if let Some(bad) = means.iter().position(|m| !m.iter().all(|v| v.is_finite())) {
        return Err(Error::Evaluation(format!(
            "non-finite spherical mean at r = {}",
            radii[bad]
        )));
    }
    let norms = means.iter().map(norm3).collect();
    Ok(RadialMeanProfile {
        radii: radii.to_vec(),
        means,
        norms,
        gaussian_mean: f.gaussian_mean(8, sphere_degree),
        sphere_degree,
    })
}

/// Spherical rule degree used by default for `f`.
pub fn default_sphere_degree(f: &SphereFunction) -> usize {
    match f.angular_degree() {
        Some(d) => 2 * d + 12,
        None => 24,
    }
}

/// Shell radii of `f` (or the default 64 shells), each interval split into
/// [`PROFILE_REFINEMENT`] geometric pieces, with both sides of every jump.
pub fn default_profile_radii(f: &SphereFunction) -> Vec<f64> {
    let base = match f {
        SphereFunction::ShellHarmonic(s) => s.radii().to_vec(),
        _ => default_shell_radii(super::function::DEFAULT_SHELLS),
    };
    let mut radii = Vec::with_capacity(base.len() * PROFILE_REFINEMENT);
    for w in base.windows(2) {
        let ratio = (w[1] / w[0]).powf(1.0 / PROFILE_REFINEMENT as f64);
        let mut r = w[0];
        for _ in 0..PROFILE_REFINEMENT {
            radii.push(r);
            r *= ratio;
        }
    }
    radii.push(*base.last().unwrap());
    if let SphereFunction::Piecewise { .. } = f {
        for b in f.radial_breaks() {
            radii.push(b * (1.0 - 1e-9));
            radii.push(b * (1.0 + 1e-9));
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| *a == *b);
    radii
}

/// Profile on [`default_profile_radii`] with [`default_sphere_degree`].
pub fn default_profile(f: &SphereFunction) -> Result<RadialMeanProfile> {
    radial_mean_profile(f, &default_profile_radii(f), default_sphere_degree(f))
}
