//! Funk–Hecke spectrum of the correlated sphere law `N_ρ^{r,s}`.
//!
//! For `X ∼_ρ Y` in `ℝⁿ` with `‖X‖ = r`, `‖Y‖ = s`, the conditional law of
//! the directions is an exponential tilt with concentration
//! `a = ρrs/(1−ρ²)`. Its smoothing operator acts on degree-`d` spherical
//! harmonics by the eigenvalue `λ_{d,n}^{r,s}`, which depends on `(ρ, r, s)`
//! only through `a`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::Integrator;
use crate::specfun::{bessel_ratio, gegenbauer_normalized, langevin, mills_ratio};

/// Upper limit used for Gaussian-weighted radial integrals.
pub const RADIAL_CUTOFF: f64 = 40.0;

/// Concentration `a = ρrs/(1−ρ²)` of the tilted sphere law.
///
/// `ρ = 0` or `rs = 0` give the uncoupled limit `a = 0`.
pub fn concentration(rho: f64, r: f64, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(domain("rho", rho, "in [0, 1)"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain("r", r, "finite and >= 0"));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(domain("s", s, "finite and >= 0"));
    }
    Ok(rho * (r * s) / ((1.0 - rho) * (1.0 + rho)))
}

/// A point `(d, n, ρ, r, s)` of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueQuery {
    pub d: u32,
    pub n: u32,
    pub rho: f64,
    pub r: f64,
    pub s: f64,
}

impl EigenvalueQuery {
    pub fn new(d: u32, n: u32, rho: f64, r: f64, s: f64) -> Self {
        Self { d, n, rho, r, s }
    }

    pub fn concentration(&self) -> Result<f64> {
        concentration(self.rho, self.r, self.s)
    }

    fn check_dimension(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain("n", self.n as f64, ">= 2"));
        }
        Ok(())
    }
}

/// First eigenvalue `λ_{1,n} = I_{n/2}(a) / I_{n/2−1}(a)`.
pub fn lambda1(n: u32, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain("n", n as f64, ">= 2"));
    }
    bessel_ratio(n as f64 / 2.0 - 1.0, a)
}

/// `λ_{d,n} = I_{n/2−1+d}(a) / I_{n/2−1}(a)`, as a telescoping product of
/// consecutive Bessel ratios.
pub fn lambda_d_bessel(d: u32, n: u32, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain("n", n as f64, ">= 2"));
    }
    let alpha = n as f64 / 2.0 - 1.0;
    let mut prod = 1.0;
    for j in 0..d {
        prod *= bessel_ratio(alpha + j as f64, a)?;
    }
    Ok(prod)
}

/// Lower bound `a / (n/2 + √((n/2)² + a²))` on `λ_{1,n}`.
pub fn lambda1_lower_bound(n: u32, a: f64) -> f64 {
    let h = n as f64 / 2.0;
    a / (h + (h * h + a * a).sqrt())
}

/// Lower end of the Amos sandwich for `I_{α+1}(a)/I_α(a)`.
pub fn amos_lower(alpha: f64, a: f64) -> f64 {
    a / (alpha + 1.0 + ((alpha + 1.0).powi(2) + a * a).sqrt())
}

/// Upper end of the Amos sandwich for `I_{α+1}(a)/I_α(a)`. At `α = a = 0`
/// this is the `0/0` limit `1`.
pub fn amos_upper(alpha: f64, a: f64) -> f64 {
    let den = alpha + (alpha * alpha + a * a).sqrt();
    if den == 0.0 {
        1.0
    } else {
        a / den
    }
}

fn theta_breaks(a: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    if a > 1.0 {
        let width = 1.0 / a.sqrt();
        let mut k = 1.0;
        while k * width < PI {
            breaks.push(k * width);
            k *= 2.0;
        }
    }
    breaks.push(PI);
    breaks
}

/// `λ_{d,n}` as the ratio of Gegenbauer-weighted to plain integrals of the
/// tilted density, by adaptive quadrature.
///
/// The integrals run over `θ` with `t = cos θ`, which turns the weight
/// `(1−t²)^{(n−3)/2} dt` into `sin^{n−2}θ dθ`; the tilt is evaluated as
/// `e^{a(t−1)}` so large concentrations do not overflow.
pub fn lambda_d_quadrature(q: &EigenvalueQuery) -> Result<f64> {
    q.check_dimension()?;
    let a = q.concentration()?;
    if q.d == 0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let alpha = q.n as f64 / 2.0 - 1.0;
    let power = (q.n - 2) as i32;
    let breaks = theta_breaks(a);
    let weight = |th: f64| th.sin().powi(power) * (a * (th.cos() - 1.0)).exp();
    let (den, _) = Integrator::new(0.0, 1e-13).integrate_pieces(weight, &breaks)?;
    let d = q.d;
    let numerator =
        |th: f64| gegenbauer_normalized(d, alpha, th.cos().clamp(-1.0, 1.0)).unwrap_or(f64::NAN) * weight(th);
    let (num, _) = Integrator::new(1e-14 * den, 1e-13).integrate_pieces(numerator, &breaks)?;
    Ok(num / den)
}

/// The kernel `g_{ρ,r,s}(t) = e^{at}/z`, normalized so that its average
/// against the marginal weight `(1−t²)^{(n−3)/2}` is one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub n: u32,
    pub rho: f64,
    pub r: f64,
    pub s: f64,
    pub a: f64,
    /// `∫ w(t) e^{a(t−1)} dt / ∫ w(t) dt`, so `g(t) = e^{a(t−1)} / z`.
    pub z: f64,
}

impl KernelSpec {
    pub fn new(n: u32, rho: f64, r: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain("n", n as f64, ">= 2"));
        }
        let a = concentration(rho, r, s)?;
        let power = (n - 2) as i32;
        let breaks = theta_breaks(a);
        let q = Integrator::new(0.0, 1e-13);
        let (tilted, _) = q.integrate_pieces(|th: f64| th.sin().powi(power) * (a * (th.cos() - 1.0)).exp(), &breaks)?;
        let (plain, _) = q.integrate_pieces(|th: f64| th.sin().powi(power), &[0.0, PI])?;
        Ok(Self {
            n,
            rho,
            r,
            s,
            a,
            z: tilted / plain,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * (t - 1.0)).exp() / self.z
    }

    /// `|∫ w g / ∫ w − 1|`, recomputed by independent quadrature in `t`.
    pub fn normalization_defect(&self) -> Result<f64> {
        let power = (self.n - 2) as i32;
        let q = Integrator::new(0.0, 1e-12);
        let breaks = theta_breaks(self.a);
        let (num, _) = q.integrate_pieces(|th: f64| th.sin().powi(power) * self.eval(th.cos()), &breaks)?;
        let (den, _) = q.integrate_pieces(|th: f64| th.sin().powi(power), &[0.0, PI])?;
        Ok((num / den - 1.0).abs())
    }
}

/// Change-of-measure weight `φ = 1 − 1/(ρr) + 2/(e^{2ρr} − 1)`.
///
/// The exponent is `2ρr`, with no `1/(1−ρ²)` factor; this is `langevin(ρr)`
/// rather than `λ_{1,3}` at radii `(r, 1)`.
pub fn phi(rho: f64, r: f64) -> f64 {
    langevin(rho * r)
}

/// `e^{9/(8a²)} ∫_{3/(2a)}^∞ e^{−t²/2} dt`, the lower bound on
/// `∫₀^∞ r² λ_{1,3}(ar) e^{−r²/2} dr`. Zero for `a ≤ 0`.
pub fn radial_avg_lower_bound(a: f64) -> f64 {
    if !(a > 0.0) {
        return 0.0;
    }
    mills_ratio(1.5 / a)
}

/// `∫₀^∞ r² λ_{1,3}(ar) e^{−r²/2} dr`, the quantity bounded by
/// [`radial_avg_lower_bound`].
pub fn radial_lambda1_moment(a: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(domain("a", a, "finite and >= 0"));
    }
    let breaks = radial_breaks(RADIAL_CUTOFF);
    let q = Integrator::new(1e-15, 1e-13);
    let (v, _) = q.integrate_pieces(|r| r * r * langevin(a * r) * (-0.5 * r * r).exp(), &breaks)?;
    Ok(v)
}

fn radial_breaks(r_max: f64) -> Vec<f64> {
    let mut breaks = vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0];
    breaks.retain(|&b| b < r_max);
    breaks.push(r_max);
    breaks
}

/// Both sides of `∫₀^∞ r³ e^{−r²/(2a²)}/(1+√(1+r²)) dr = e^{1/(2a²)} a³ ∫_{1/a}^∞ e^{−t²/2} dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// Evaluates both sides of the radial integral identity; the left side by
/// quadrature after `r = a u`.
pub fn radial_integral_identity(a: f64) -> Result<RadialIdentity> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain("a", a, "finite and > 0"));
    }
    let mut breaks = radial_breaks(RADIAL_CUTOFF);
    let knee = 1.0 / a;
    if knee > 0.0 && knee < RADIAL_CUTOFF {
        breaks.push(knee);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let q = Integrator::new(0.0, 1e-14);
    let (scaled, _) = q.integrate_pieces(
        |u| u * u * u * (-0.5 * u * u).exp() / (1.0 + (1.0 + a * a * u * u).sqrt()),
        &breaks,
    )?;
    let lhs = a.powi(4) * scaled;
    let rhs = a.powi(3) * mills_ratio(1.0 / a);
    Ok(RadialIdentity {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}

/// Absolute defect of the radial integral identity.
pub fn radial_integral_identity_defect(a: f64) -> Result<f64> {
    radial_integral_identity(a).map(|id| id.defect)
}

/// `√(2/π) ∫₀^∞ r² λ_{1,3}^{r√(1−ρ²), s} e^{−r²/2} dr`, the radial average of
/// the first eigenvalue with the `ρx` shift removed.
pub fn mean_lambda1_radial(rho: f64, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(domain("rho", rho, "in [0, 1)"));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(domain("s", s, "finite and >= 0"));
    }
    let k = rho * s / ((1.0 - rho) * (1.0 + rho)).sqrt();
    Ok((2.0 / PI).sqrt() * radial_lambda1_moment(k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gaussian_tail;

    #[test]
    fn concentration_examples() {
        assert!((concentration(0.5, 2.0, 3.0).unwrap() - 4.0).abs() < 1e-15);
        let small = concentration(1e-6, 1.0, 1.0).unwrap();
        assert!((small - 1e-6).abs() < 1e-17);
        assert!(concentration(1.0, 1.0, 1.0).is_err());
        assert!(concentration(-0.1, 1.0, 1.0).is_err());
        assert_eq!(concentration(0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn lambda1_examples() {
        assert_eq!(lambda1(3, 0.0).unwrap(), 0.0);
        for i in 0..60 {
            let a = 1e-3 * (5e4f64).powf(i as f64 / 59.0);
            let l = lambda1(3, a).unwrap();
            assert!((l - langevin(a)).abs() <= 1e-12 * l);
            assert!(l >= lambda1_lower_bound(3, a));
        }
        assert!(lambda1(1, 1.0).is_err());
    }

    // ∫ w C_d/C_d(1) e^{at} / ∫ w e^{at} directly in t, n = 3 (flat weight).
    fn lambda_d_t_oracle(d: u32, a: f64) -> f64 {
        let q = Integrator::new(1e-16, 1e-13);
        let den = q.integrate(|t| (a * (t - 1.0)).exp(), -1.0, 1.0).unwrap();
        let num = q
            .integrate(
                |t| gegenbauer_normalized(d, 0.5, t).unwrap() * (a * (t - 1.0)).exp(),
                -1.0,
                1.0,
            )
            .unwrap();
        num / den
    }

    #[test]
    fn lambda_d_quadrature_trivial_cases() {
        let q = EigenvalueQuery::new(0, 3, 0.4, 1.0, 2.0);
        assert_eq!(lambda_d_quadrature(&q).unwrap(), 1.0);
        let q = EigenvalueQuery::new(2, 3, 0.0, 1.0, 2.0);
        assert_eq!(lambda_d_quadrature(&q).unwrap(), 0.0);
        let q = EigenvalueQuery::new(1, 3, 0.3, 0.0, 2.0);
        assert_eq!(lambda_d_quadrature(&q).unwrap(), 0.0);
    }

    #[test]
    fn lambda_d_quadrature_matches_bessel_product() {
        for &(rho, r, s) in &[(0.1, 1.0, 1.0), (0.5, 2.0, 3.0), (0.9, 3.0, 4.0), (0.3, 0.2, 0.7)] {
            for n in 2..6 {
                for d in 1..6 {
                    let q = EigenvalueQuery::new(d, n, rho, r, s);
                    let a = q.concentration().unwrap();
                    let quad = lambda_d_quadrature(&q).unwrap();
                    let bessel = lambda_d_bessel(d, n, a).unwrap();
                    assert!((quad - bessel).abs() < 1e-9, "n={n} d={d} a={a}: {quad} vs {bessel}");
                    assert!((0.0..=1.0).contains(&quad));
                }
            }
        }
    }

    #[test]
    fn lambda_d_quadrature_matches_t_form_for_n3() {
        for &a in &[0.05, 1.0, 7.5] {
            let rho = 0.5;
            let r = a * 0.75 / 0.5;
            for d in 1..5 {
                let q = EigenvalueQuery::new(d, 3, rho, r, 1.0);
                let v = lambda_d_quadrature(&q).unwrap();
                assert!((v - lambda_d_t_oracle(d, a)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lambda1_quadrature_consistency() {
        for &(rho, r, s) in &[(0.05, 1.0, 1.0), (0.5, 2.0, 3.0), (0.95, 4.0, 5.0)] {
            let q = EigenvalueQuery::new(1, 3, rho, r, s);
            let a = q.concentration().unwrap();
            let quad = lambda_d_quadrature(&q).unwrap();
            assert!((quad - lambda1(3, a).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn kernel_normalization() {
        for &(n, rho, r, s) in &[(3, 0.5, 1.0, 2.0), (2, 0.3, 1.0, 1.0), (5, 0.8, 2.0, 2.0)] {
            let k = KernelSpec::new(n, rho, r, s).unwrap();
            assert!(k.normalization_defect().unwrap() < 1e-10);
        }
        // n = 3: z = (1 − e^{−2a})/(2a) in the shifted form
        let k = KernelSpec::new(3, 0.5, 2.0, 3.0).unwrap();
        let closed = -(-8.0f64).exp_m1() / 8.0;
        assert!((k.z - closed).abs() < 1e-13);
    }

    #[test]
    fn phi_examples() {
        assert!((phi(0.1, 10.0) - 0.313_035_3).abs() < 1e-7);
        assert!((phi(1e-4, 1e-3) - 1e-7 / 3.0).abs() < 1e-18);
        assert!((phi(1.0, 1e6) - 1.0).abs() < 2e-6);
        for i in 1..100 {
            assert!(phi(0.05, i as f64 * 0.3) > 0.0);
        }
    }

    #[test]
    fn radial_lower_bound_examples() {
        let v = radial_avg_lower_bound(1.5);
        let direct = 0.5f64.exp() * gaussian_tail(1.0);
        assert!((v - direct).abs() < 1e-14);
        assert!((v - 0.65568).abs() < 1e-5);
        let tiny = radial_avg_lower_bound(0.05);
        let direct = (9.0 / (8.0 * 0.0025f64)).exp() * gaussian_tail(30.0);
        assert!((tiny - direct).abs() < 1e-12 * direct);
        assert!(tiny < 0.04);
        assert_eq!(radial_avg_lower_bound(0.0), 0.0);
    }

    #[test]
    fn radial_lower_bound_below_moment() {
        for i in 0..40 {
            let a = 0.05 * (400f64).powf(i as f64 / 39.0);
            let lower = radial_avg_lower_bound(a);
            let moment = radial_lambda1_moment(a).unwrap();
            assert!(lower <= moment, "a={a}: {lower} > {moment}");
        }
    }

    #[test]
    fn radial_identity_examples() {
        for &a in &[0.1, 1.0, 10.0] {
            assert!(radial_integral_identity_defect(a).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn mean_lambda1_radial_limits() {
        assert_eq!(mean_lambda1_radial(0.0, 1.0).unwrap(), 0.0);
        assert!(mean_lambda1_radial(1e-6, 1.0).unwrap() < 1e-5);
        let big = mean_lambda1_radial(0.5, 1e6).unwrap();
        assert!((big - 1.0).abs() < 1e-4);
        for &(rho, s) in &[(0.03, 5.0), (0.1, 20.0), (0.19, 1.0), (0.15, 200.0)] {
            let m = mean_lambda1_radial(rho, s).unwrap();
            assert!(m >= 0.98 * phi(rho, s));
            let k = rho * s / (1.0 - rho * rho).sqrt();
            assert!(m >= (2.0 / PI).sqrt() * radial_avg_lower_bound(k));
        }
    }
}
