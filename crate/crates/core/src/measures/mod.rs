//! Probability laws: ρ-correlated Gaussians, the correlated sphere law
//! `N_ρ^{r,s}`, the Mehler even-part kernel and the change-of-measure
//! constant.

pub mod mehler;
pub mod stream;

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::{dot3, RunningStats};

pub use mehler::{mehler_even_defect, MehlerDefect, MAX_MEHLER_DEGREE};
pub use stream::{chunk_sizes, map_chunks, mc_stats, SeededStream, CHUNK_SIZE};

/// Joint law of `(X, Y)` in `ℝⁿ × ℝⁿ` with standard Gaussian marginals and
/// cross-covariance `ρ I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairLaw {
    pub n: usize,
    pub rho: f64,
}

impl GaussianPairLaw {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, ">= 1"));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(domain("rho", rho, "in (-1, 1)"));
        }
        Ok(Self { n, rho })
    }

    fn sigma(&self) -> f64 {
        ((1.0 - self.rho) * (1.0 + self.rho)).sqrt()
    }
}

/// One pair in three dimensions: `Y = ρX + √(1−ρ²) Z`.
#[inline]
pub fn draw_gaussian_pair3(rng: &mut ChaCha8Rng, rho: f64, sigma: f64) -> ([f64; 3], [f64; 3]) {
    let x: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let y = std::array::from_fn(|i| rho * x[i] + sigma * z[i]);
    (x, y)
}

fn draw_gaussian_pair(rng: &mut ChaCha8Rng, n: usize, rho: f64, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let y = x.iter().zip(&z).map(|(a, b)| rho * a + sigma * b).collect();
    (x, y)
}

/// `count` draws of `(X, Y)`, in stream order.
pub fn sample_gaussian_pairs(law: &GaussianPairLaw, stream: &SeededStream, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let sigma = law.sigma();
    map_chunks(stream, count, |rng, len| {
        (0..len)
            .map(|_| draw_gaussian_pair(rng, law.n, law.rho, sigma))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Three-dimensional pairs as fixed-size arrays. Draws are identical to
/// [`sample_gaussian_pairs`] with `n = 3`.
pub fn sample_gaussian_pairs3(rho: f64, stream: &SeededStream, count: usize) -> Result<Vec<([f64; 3], [f64; 3])>> {
    let law = GaussianPairLaw::new(3, rho)?;
    let sigma = law.sigma();
    Ok(map_chunks(stream, count, |rng, len| {
        (0..len)
            .map(|_| draw_gaussian_pair3(rng, rho, sigma))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect())
}

/// Chunked Monte Carlo over 3-d Gaussian pairs.
pub fn mc_gaussian_pairs3<const K: usize, F>(
    rho: f64,
    stream: &SeededStream,
    count: usize,
    statistic: F,
) -> Result<[RunningStats; K]>
where
    F: Fn(&[f64; 3], &[f64; 3]) -> [f64; K] + Sync,
{
    let law = GaussianPairLaw::new(3, rho)?;
    let sigma = law.sigma();
    Ok(mc_stats(stream, count, |rng| {
        let (x, y) = draw_gaussian_pair3(rng, rho, sigma);
        statistic(&x, &y)
    }))
}

/// `ln G_ρ(x, y)`.
pub fn log_density_g(x: &[f64], y: &[f64], rho: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(crate::Error::Invalid(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(domain("rho", rho, "in (-1, 1)"));
    }
    let n = x.len() as f64;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(-n * (2.0 * PI).ln() - 0.5 * n * one_m.ln() - (xx + yy - 2.0 * rho * xy) / (2.0 * one_m))
}

/// Joint density `G_ρ(x, y)` of `X ∼_ρ Y`.
pub fn density_g(x: &[f64], y: &[f64], rho: f64) -> Result<f64> {
    log_density_g(x, y, rho).map(f64::exp)
}

/// Standard Gaussian density `γ_n(x)`.
pub fn gaussian_density(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    (-0.5 * n * (2.0 * PI).ln() - 0.5 * xx).exp()
}

/// The correlated sphere law `N_ρ^{r,s}` on `S² × S²`: `U` uniform and
/// `V | U` with density proportional to `e^{a⟨U,V⟩}`, `a = ρrs/(1−ρ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePairLaw {
    pub n: usize,
    pub rho: f64,
    pub r: f64,
    pub s: f64,
}

impl SpherePairLaw {
    pub fn new(rho: f64, r: f64, s: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(domain("rho", rho, "in (-1, 1)"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(domain("r", r, "finite and > 0"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(domain("s", s, "finite and > 0"));
        }
        Ok(Self { n: 3, rho, r, s })
    }

    /// Signed concentration `ρrs/(1−ρ²)`.
    pub fn concentration(&self) -> f64 {
        self.rho * self.r * self.s / ((1.0 - self.rho) * (1.0 + self.rho))
    }
}

/// Conditional CDF of `T = ⟨u, V⟩` under concentration `a`:
/// `(e^{at} − e^{−a}) / (e^a − e^{−a})`.
pub fn sphere_cosine_cdf(a: f64, t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    if a == 0.0 {
        return 0.5 * (t + 1.0);
    }
    if a > 0.0 {
        // (e^{a(t+1)} − 1)/(e^{2a} − 1), written in the shifted form
        let num = (a * (t + 1.0)).exp_m1();
        let den = (2.0 * a).exp_m1();
        if den.is_finite() {
            num / den
        } else {
            (a * (t - 1.0)).exp() * (1.0 - (-a * (t + 1.0)).exp()) / (1.0 - (-2.0 * a).exp())
        }
    } else {
        1.0 - sphere_cosine_cdf(-a, -t)
    }
}

/// Inverse of [`sphere_cosine_cdf`] at `xi ∈ [0, 1]`.
pub fn sphere_cosine_quantile(a: f64, xi: f64) -> f64 {
    if a == 0.0 {
        return 2.0 * xi - 1.0;
    }
    if a < 0.0 {
        return -sphere_cosine_quantile(-a, 1.0 - xi);
    }
    let t = if a > 1.0 {
        1.0 + (xi + (1.0 - xi) * (-2.0 * a).exp()).ln() / a
    } else {
        (xi * (2.0 * a).exp_m1()).ln_1p() / a - 1.0
    };
    t.clamp(-1.0, 1.0)
}

/// Unit vector from a uniform `z ∈ [−1, 1]` and longitude.
fn sphere_point(z: f64, lon: f64) -> [f64; 3] {
    let rho = (1.0 - z * z).max(0.0).sqrt();
    [rho * lon.cos(), rho * lon.sin(), z]
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `u`.
pub fn orthonormal_frame(u: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let (ax, ay, az) = (u[0].abs(), u[1].abs(), u[2].abs());
    let helper = if ax <= ay && ax <= az {
        [1.0, 0.0, 0.0]
    } else if ay <= az {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = dot3(u, &helper);
    let mut e1 = [helper[0] - d * u[0], helper[1] - d * u[1], helper[2] - d * u[2]];
    let n1 = dot3(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|c| *c /= n1);
    let e2 = [
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ];
    (e1, e2)
}

/// Uniform point on S².
#[inline]
pub fn draw_uniform_sphere(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let lon = 2.0 * PI * rng.random::<f64>();
    sphere_point(z, lon)
}

/// Draws `V` given `U = u` under concentration `a`.
#[inline]
pub fn draw_tilted(rng: &mut ChaCha8Rng, u: &[f64; 3], a: f64) -> [f64; 3] {
    let t = sphere_cosine_quantile(a, rng.random::<f64>());
    let psi = 2.0 * PI * rng.random::<f64>();
    let w = (1.0 - t * t).max(0.0).sqrt();
    let (e1, e2) = orthonormal_frame(u);
    let (c, s) = (psi.cos(), psi.sin());
    std::array::from_fn(|i| t * u[i] + w * (c * e1[i] + s * e2[i]))
}

/// `count` draws of `(U, V) ∼ N_ρ^{r,s}`, in stream order.
pub fn sample_sphere_pairs(law: &SpherePairLaw, stream: &SeededStream, count: usize) -> Vec<([f64; 3], [f64; 3])> {
    let a = law.concentration();
    map_chunks(stream, count, |rng, len| {
        (0..len)
            .map(|_| {
                let u = draw_uniform_sphere(rng);
                let v = draw_tilted(rng, &u, a);
                (u, v)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Chunked Monte Carlo over sphere pairs with concentration `a`.
pub fn mc_sphere_pairs<const K: usize, F>(
    a: f64,
    stream: &SeededStream,
    count: usize,
    statistic: F,
) -> [RunningStats; K]
where
    F: Fn(&[f64; 3], &[f64; 3]) -> [f64; K] + Sync,
{
    mc_stats(stream, count, |rng| {
        let u = draw_uniform_sphere(rng);
        let v = draw_tilted(rng, &u, a);
        statistic(&u, &v)
    })
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Writes pairs as CSV rows `x1,x2,x3,y1,y2,y3` under a header.
pub fn write_pairs_csv<W: Write>(pairs: &[([f64; 3], [f64; 3])], mut out: W) -> io::Result<()> {
    writeln!(out, "x1,x2,x3,y1,y2,y3")?;
    for (x, y) in pairs {
        writeln!(out, "{},{},{},{},{},{}", x[0], x[1], x[2], y[0], y[1], y[2])?;
    }
    Ok(())
}

/// Closed form of the change-of-measure constant
///
/// `√(2/π) ∫₀^∞ (3r/ρ + r²) K_ρ(r) dr`,
/// `K_ρ(r) = (−2(1−ρ²)^{3/2} e^{−r²/2} + e^{−r²b₊} + e^{−r²b₋}) / (2(1−ρ²)^{3/2})`,
/// `b± = 1/(1±ρ) − 1/2`, which bounds the even Mehler sum weighted by `1/φ`.
pub fn change_of_measure_constant(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0 / 9.0) {
        return Err(domain("rho", rho, "in (0, 1/9)"));
    }
    let c = ((1.0 - rho) * (1.0 + rho)).powf(1.5);
    let bp = 1.0 / (1.0 + rho) - 0.5;
    let bm = 1.0 / (1.0 - rho) - 0.5;
    let k = (2.0 / PI).sqrt();
    let linear = k / (2.0 * c) * (3.0 / rho) * (-2.0 * c + 1.0 / (2.0 * bp) + 1.0 / (2.0 * bm));
    let quadratic = k / c * (PI.sqrt() / 8.0) * (-2.0 * 2f64.powf(1.5) * c + bp.powf(-1.5) + bm.powf(-1.5));
    Ok(linear + quadratic)
}

/// The kernel `K_ρ(r)` of [`change_of_measure_constant`].
pub fn change_of_measure_kernel(rho: f64, r: f64) -> f64 {
    let c = ((1.0 - rho) * (1.0 + rho)).powf(1.5);
    let bp = 1.0 / (1.0 + rho) - 0.5;
    let bm = 1.0 / (1.0 - rho) - 0.5;
    let r2 = r * r;
    (-2.0 * c * (-0.5 * r2).exp() + (-r2 * bp).exp() + (-r2 * bm).exp()) / (2.0 * c)
}
