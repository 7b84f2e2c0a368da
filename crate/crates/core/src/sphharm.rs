//! Real spherical harmonics on S², orthonormal for the normalized surface
//! measure σ, and per-degree projections of functions on the sphere.

use crate::error::{Error, Result};
use crate::quadrature::SphericalGrid;

/// Number of harmonics of degree `≤ max_degree`.
pub fn harmonic_count(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

/// Position of `Y_{l,m}` (`−l ≤ m ≤ l`) in the flat layout.
#[inline]
pub fn harmonic_index(l: usize, m: isize) -> usize {
    ((l * l + l) as isize + m) as usize
}

/// All `Y_{l,m}(u)` for `l ≤ max_degree` at a unit vector `u`, written into
/// `out[l² + l + m]`.
///
/// `Y_{l,0} = Q_l^0(z)`, `Y_{l,±m} = √2 Q̃_l^m(z) · (Re, Im)(x + iy)^m`, where
/// `Q̃_l^m` is the fully normalized associated Legendre function with its
/// `sin^m θ` factor removed. No division by `sin θ` occurs.
pub fn real_harmonics(max_degree: usize, u: &[f64; 3], out: &mut [f64]) {
    let count = harmonic_count(max_degree);
    assert!(out.len() >= count, "output buffer too short");
    let (x, y, z) = (u[0], u[1], u[2]);
    // (x + iy)^m, built incrementally
    let (mut cr, mut ci) = (1.0, 0.0);
    // Q̃_m^m
    let mut qmm = 1.0;
    for m in 0..=max_degree {
        if m > 0 {
            let mf = m as f64;
            qmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            let nr = cr * x - ci * y;
            ci = cr * y + ci * x;
            cr = nr;
        }
        let (az_c, az_s) = if m == 0 {
            (1.0, 0.0)
        } else {
            (std::f64::consts::SQRT_2 * cr, std::f64::consts::SQRT_2 * ci)
        };
        let mut prev2 = 0.0;
        let mut prev = qmm;
        for l in m..=max_degree {
            let q = if l == m {
                qmm
            } else if l == m + 1 {
                (2.0 * m as f64 + 3.0).sqrt() * z * qmm
            } else {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let l1 = lf - 1.0;
                let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
                a * (z * prev - b * prev2)
            };
            if l > m {
                prev2 = prev;
                prev = q;
            }
            let base = l * l + l;
            if m == 0 {
                out[base] = q;
            } else {
                out[base + m] = q * az_c;
                out[base - m] = q * az_s;
            }
        }
    }
}

/// Harmonic coefficients `∫ F_c Y_{l,m} dσ` of a vector-valued function for
/// every component `c` and `l ≤ max_degree`, by the given product rule.
pub fn harmonic_coefficients<const K: usize, F>(f: F, max_degree: usize, grid: &SphericalGrid) -> Result<Vec<[f64; K]>>
where
    F: Fn(&[f64; 3]) -> [f64; K],
{
    if grid.exact_degree() < 2 * max_degree {
        return Err(Error::Invalid(format!(
            "spherical rule exact to degree {} cannot resolve harmonics of degree {} (needs {})",
            grid.exact_degree(),
            max_degree,
            2 * max_degree
        )));
    }
    let count = harmonic_count(max_degree);
    let mut coeffs = vec![[0.0; K]; count];
    let mut ys = vec![0.0; count];
    for (p, &w) in grid.points().iter().zip(grid.weights()) {
        real_harmonics(max_degree, p, &mut ys);
        let v = f(p);
        for (c, &yv) in coeffs.iter_mut().zip(&ys) {
            for k in 0..K {
                c[k] += w * yv * v[k];
            }
        }
    }
    Ok(coeffs)
}

/// `‖Proj_d F‖²_{L²(σ)}` for `d = 0..=max_degree`, summed over components.
pub fn spherical_projection_norms<const K: usize, F>(f: F, max_degree: usize, grid: &SphericalGrid) -> Result<Vec<f64>>
where
    F: Fn(&[f64; 3]) -> [f64; K],
{
    let coeffs = harmonic_coefficients(f, max_degree, grid)?;
    Ok((0..=max_degree)
        .map(|l| {
            coeffs[l * l..(l + 1) * (l + 1)]
                .iter()
                .map(|c| c.iter().map(|v| v * v).sum::<f64>())
                .sum()
        })
        .collect())
}
