//! Detection of the equality family `x ↦ M x/‖x‖` by orthogonal Procrustes.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{chi3_rule, SphericalGrid};
use crate::stability::profile::default_sphere_degree;
use crate::stability::SphereFunction;

/// Residual at or below which `f` is declared an equality case.
pub const EQUALITY_RESIDUAL: f64 = 1e-3;

/// Relative size of the smallest singular value below which the
/// cross-moment is treated as rank-deficient.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityFit {
    pub is_optimal: bool,
    /// Fitted orthogonal matrix, by rows.
    pub matrix: [[f64; 3]; 3],
    /// `E_γ ‖f(x) − M x/‖x‖‖²`.
    pub residual: f64,
    pub singular_values: [f64; 3],
    /// `E_γ[f(x) (x/‖x‖)ᵀ]`.
    pub cross_moment: [[f64; 3]; 3],
}

/// `E_γ[f(x) (x/‖x‖)ᵀ]` by a chi(3) radial rule times a spherical rule.
pub fn cross_moment(f: &SphereFunction) -> [[f64; 3]; 3] {
    let rule = chi3_rule(&f.radial_breaks(), 12.0, 8);
    let grid = SphericalGrid::exact_for(default_sphere_degree(f) + 1);
    let mut c = [[0.0; 3]; 3];
    for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
        for (u, &wu) in grid.points().iter().zip(grid.weights()) {
            let v = f.eval(&[r * u[0], r * u[1], r * u[2]]);
            for i in 0..3 {
                for j in 0..3 {
                    c[i][j] += wr * wu * v[i] * u[j];
                }
            }
        }
    }
    c
}

/// Fits `M = U Vᵀ` from the SVD `C = U Σ Vᵀ` of the cross-moment; the
/// residual is `2 − 2 tr(Mᵀ C)`.
pub fn equality_case_detect(f: &SphereFunction) -> Result<EqualityFit> {
    fit_cross_moment(cross_moment(f))
}

/// Procrustes fit from a given cross-moment.
pub fn fit_cross_moment(c: [[f64; 3]; 3]) -> Result<EqualityFit> {
    let cm = Matrix3::from_fn(|i, j| c[i][j]);
    if !cm.iter().all(|v| v.is_finite()) {
        return Err(Error::Evaluation("cross-moment is not finite".into()));
    }
    let svd = cm.svd(true, true);
    let mut sv = [svd.singular_values[0], svd.singular_values[1], svd.singular_values[2]];
    sv.sort_by(|a, b| b.total_cmp(a));
    if !(sv[2] > RANK_TOLERANCE * sv[0].max(f64::MIN_POSITIVE)) || sv[0] == 0.0 {
        return Err(Error::Degenerate { singular_values: sv });
    }
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let m = u * vt;
    let trace: f64 = (m.transpose() * cm).trace();
    let residual = (2.0 - 2.0 * trace).max(0.0);
    Ok(EqualityFit {
        is_optimal: residual <= EQUALITY_RESIDUAL,
        matrix: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])),
        residual,
        singular_values: sv,
        cross_moment: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit, Vector3};

    #[test]
    fn fopt_fits_identity() {
        let fit = equality_case_detect(&SphereFunction::fopt()).unwrap();
        assert!(fit.is_optimal);
        assert!(fit.residual < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((fit.matrix[i][j] - e).abs() < 1e-12);
                assert!((fit.cross_moment[i][j] - e / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovers_rotation() {
        let axis = Unit::new_normalize(Vector3::new(0.3, -1.0, 0.5));
        let rot = Rotation3::from_axis_angle(&axis, 1.1);
        let m: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| rot[(i, j)]));
        let fit = equality_case_detect(&SphereFunction::orthogonal(m).unwrap()).unwrap();
        assert!(fit.is_optimal);
        for i in 0..3 {
            for j in 0..3 {
                assert!((fit.matrix[i][j] - m[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn constant_is_degenerate() {
        let e = SphereFunction::constant([1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(equality_case_detect(&e), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn perturbed_function_is_not_optimal() {
        let f = SphereFunction::piecewise(
            1.0,
            SphereFunction::constant([0.0, 0.0, 1.0]).unwrap(),
            SphereFunction::fopt(),
        )
        .unwrap();
        let fit = equality_case_detect(&f).unwrap();
        assert!(!fit.is_optimal);
        assert!(fit.residual > 0.1);
    }
}
