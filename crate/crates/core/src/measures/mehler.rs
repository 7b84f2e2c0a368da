//! Even part of the Mehler (Ornstein–Uhlenbeck) kernel in three dimensions.
//!
//! With orthonormal Hermite products `H_k(x) = √(k!) h_k(x)`, Mehler's
//! formula reads `Σ_k ρ^{|k|} H_k(x) H_k(y) = G_ρ(x, y) / (γ(x) γ(y))`.
//! Restricting to even total degree on the diagonal gives
//! `Σ_{|k| even} ρ^{|k|} H_k(x)² = [G_ρ(x,x) + G_ρ(x,−x)] / (2γ(x)²)`.

use serde::Serialize;

use super::{density_g, gaussian_density};
use crate::error::{domain, Error, Result};

/// Largest total degree summed.
pub const MAX_MEHLER_DEGREE: u32 = 24;

/// Increment size below which summation stops early.
pub const MEHLER_EARLY_STOP: f64 = 1e-12;

/// One even degree of the partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MehlerTerm {
    pub degree: u32,
    /// Cumulative coordinate-even sum through this degree.
    pub coordinate_even: f64,
    /// Cumulative full even-degree sum through this degree.
    pub full_even: f64,
}

/// Partial sums of the even Mehler kernel at a point, and the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MehlerDefect {
    pub x: [f64; 3],
    pub rho: f64,
    pub max_degree: u32,
    /// Last degree actually summed (early stop may end before `max_degree`).
    pub last_degree: u32,
    /// `Σ_{2 ≤ d ≤ D, d even} ρ^d Σ_{k ∈ (2ℕ)³, |k|=d} k! h_k(x)²`.
    pub partial_sum: f64,
    /// Same with every `k` of even `|k|`, not only coordinate-even ones.
    pub full_even_sum: f64,
    /// `[G_ρ(x,x) + G_ρ(x,−x)] / (2γ(x)) − γ(x)`, the integrand in the
    /// change-of-measure bound (it carries one factor `γ(x)`).
    pub closed_form: f64,
    /// `closed_form / γ(x)`, directly comparable with the sums.
    pub closed_unweighted: f64,
    pub terms: Vec<MehlerTerm>,
}

// H_m(x)² = m! h_m(x)² for m = 0..=max, via the orthonormal recurrence.
fn orthonormal_hermite_squares(x: f64, max: usize) -> Vec<f64> {
    let mut p = vec![0.0; max + 1];
    p[0] = 1.0;
    if max >= 1 {
        p[1] = x;
    }
    for m in 1..max {
        p[m + 1] = (x * p[m] - (m as f64).sqrt() * p[m - 1]) / ((m + 1) as f64).sqrt();
    }
    p.into_iter().map(|v| v * v).collect()
}

/// Evaluates the even Mehler partial sums at `x` up to degree `max_degree`.
///
/// `max_degree` must be even and in `[2, 24]`; `ρ ∈ [0, 1)`.
pub fn mehler_even_defect(x: [f64; 3], rho: f64, max_degree: u32) -> Result<MehlerDefect> {
    if max_degree % 2 == 1 {
        return Err(Error::Invalid(format!("degree cap {max_degree} must be even")));
    }
    if !(2..=MAX_MEHLER_DEGREE).contains(&max_degree) {
        return Err(Error::SizeLimit {
            what: "degree cap",
            value: max_degree as usize,
            max: MAX_MEHLER_DEGREE as usize,
        });
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(domain("rho", rho, "in [0, 1)"));
    }
    let dmax = max_degree as usize;
    let sq: Vec<Vec<f64>> = x.iter().map(|&xi| orthonormal_hermite_squares(xi, dmax)).collect();

    let mut coordinate_even = 0.0;
    let mut full_even = 0.0;
    let mut terms = Vec::new();
    let mut last_degree = 0;
    for d in (2..=dmax).step_by(2) {
        let mut shell_coord = 0.0;
        let mut shell_full = 0.0;
        for k1 in 0..=d {
            for k2 in 0..=d - k1 {
                let k3 = d - k1 - k2;
                let v = sq[0][k1] * sq[1][k2] * sq[2][k3];
                shell_full += v;
                if k1 % 2 == 0 && k2 % 2 == 0 && k3 % 2 == 0 {
                    shell_coord += v;
                }
            }
        }
        let weight = rho.powi(d as i32);
        coordinate_even += weight * shell_coord;
        full_even += weight * shell_full;
        last_degree = d as u32;
        terms.push(MehlerTerm {
            degree: d as u32,
            coordinate_even,
            full_even,
        });
        if weight * shell_full < MEHLER_EARLY_STOP * (1.0 + full_even) && d >= 4 {
            break;
        }
    }

    let gamma = gaussian_density(&x);
    let minus_x = [-x[0], -x[1], -x[2]];
    let closed_unweighted = if rho == 0.0 {
        0.0
    } else {
        let g_same = density_g(&x, &x, rho)?;
        let g_flip = density_g(&x, &minus_x, rho)?;
        (g_same + g_flip) / (2.0 * gamma * gamma) - 1.0
    };
    Ok(MehlerDefect {
        x,
        rho,
        max_degree,
        last_degree,
        partial_sum: coordinate_even,
        full_even_sum: full_even,
        closed_form: gamma * closed_unweighted,
        closed_unweighted,
        terms,
    })
}
