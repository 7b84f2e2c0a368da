//! Scalar special functions: modified Bessel ratios, the Langevin function,
//! Gegenbauer and Hermite polynomials, rising factorials and the Gaussian
//! tail integral.
//!
//! Everything here is pure and double precision.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const LENTZ_TINY: f64 = 1e-300;
const BESSEL_MAX_ITER: usize = 2_000_000;

/// Input of [`bessel_ratio`]: order `alpha ≥ 0` and argument `a ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRatioQuery {
    pub alpha: f64,
    pub a: f64,
}

impl BesselRatioQuery {
    pub fn new(alpha: f64, a: f64) -> Self {
        Self { alpha, a }
    }

    pub fn eval(&self) -> Result<f64> {
        bessel_ratio(self.alpha, self.a)
    }
}

/// `I_{α+1}(a) / I_α(a)` for `α ≥ 0`, `a ≥ 0`.
///
/// Evaluated as the continued fraction
/// `1 / (2(α+1)/a + 1 / (2(α+2)/a + 1 / (2(α+3)/a + …)))`
/// with the modified Lentz algorithm, so neither Bessel function is formed.
/// The result lies in `[0, 1)`.
pub fn bessel_ratio(alpha: f64, a: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(domain("alpha", alpha, "finite and >= 0"));
    }
    if !a.is_finite() || a < 0.0 {
        return Err(domain("a", a, "finite and >= 0"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let mut f = LENTZ_TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=BESSEL_MAX_ITER {
        let b = 2.0 * (alpha + k as f64) / a;
        d += b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + 1.0 / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 0.5 * f64::EPSILON {
            return Ok(f);
        }
    }
    Err(Error::NotConverged {
        routine: "bessel_ratio continued fraction",
        iterations: BESSEL_MAX_ITER,
    })
}

// Taylor coefficients of coth(a) − 1/a: 2^{2n} B_{2n} / (2n)!.
const LANGEVIN_SERIES: [f64; 14] = [
    0.333_333_333_333_333_3,
    -0.022_222_222_222_222_223,
    0.002_116_402_116_402_116_5,
    -0.000_211_640_211_640_211_65,
    2.137_779_915_557_693_5e-5,
    -2.164_404_280_806_397_2e-6,
    2.192_594_785_187_377_8e-7,
    -2.221_460_878_997_967_8e-8,
    2.250_784_651_680_899_4e-9,
    -2.280_515_120_459_218_3e-10,
    2.310_643_259_900_262_4e-11,
    -2.341_170_681_982_488_2e-12,
    2.372_101_740_023_365_3e-13,
    -2.403_441_533_330_770_5e-14,
];
const LANGEVIN_SERIES_CUTOFF: f64 = 0.5;

/// Langevin function `1 − 1/a + 2/(e^{2a} − 1) = coth(a) − 1/a`.
///
/// This is the first Funk–Hecke eigenvalue of the exponential kernel on S²
/// at concentration `a`. Odd in `a`; near zero a Taylor branch avoids the
/// cancellation between `1/a` and `2/(e^{2a} − 1)`.
pub fn langevin(a: f64) -> f64 {
    if a < 0.0 {
        return -langevin(-a);
    }
    if a < LANGEVIN_SERIES_CUTOFF {
        let a2 = a * a;
        let mut acc = 0.0;
        for &c in LANGEVIN_SERIES.iter().rev() {
            acc = acc * a2 + c;
        }
        a * acc
    } else {
        1.0 - 1.0 / a + 2.0 / (2.0 * a).exp_m1()
    }
}

/// Rising factorial `(x)_d = x (x+1) ⋯ (x+d−1)`, with `(x)_0 = 1`.
pub fn rising_factorial(x: f64, d: u32) -> f64 {
    (0..d).fold(1.0, |acc, j| acc * (x + j as f64))
}

/// Gegenbauer polynomial `C_d^{(α)}(t)` by three-term recurrence.
pub fn gegenbauer(d: u32, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > -0.5) {
        return Err(domain("alpha", alpha, "> -1/2"));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(domain("t", t, "in [-1, 1]"));
    }
    Ok(gegenbauer_unchecked(d, alpha, t))
}

fn gegenbauer_unchecked(d: u32, alpha: f64, t: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * alpha * t;
    for n in 2..=d {
        let nf = n as f64;
        let next = (2.0 * t * ((nf - 1.0) + alpha) * cur - ((nf - 2.0) + 2.0 * alpha) * prev) / nf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_d^{(α)}(t) / C_d^{(α)}(1)`. At `α = 0` this is the Chebyshev limit
/// `T_d(t)`.
pub fn gegenbauer_normalized(d: u32, alpha: f64, t: f64) -> Result<f64> {
    if alpha == 0.0 {
        if !(-1.0..=1.0).contains(&t) {
            return Err(domain("t", t, "in [-1, 1]"));
        }
        let (mut prev, mut cur) = (1.0, t);
        if d == 0 {
            return Ok(1.0);
        }
        for _ in 1..d {
            let next = 2.0 * t * cur - prev;
            prev = cur;
            cur = next;
        }
        return Ok(cur);
    }
    let value = gegenbauer(d, alpha, t)?;
    Ok(value / gegenbauer_unchecked(d, alpha, 1.0))
}

/// Normalized Hermite polynomial
/// `h_m(x) = Σ_k x^{m−2k} (−1)^k 2^{−k} / (k! (m−2k)!)`, i.e. `He_m(x)/m!`.
///
/// `{√(m!) h_m}` is orthonormal for the standard Gaussian on ℝ. Computed by
/// the recurrence `(m+1) h_{m+1} = x h_m − h_{m−1}`.
pub fn hermite(m: u32, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..m {
        let next = (x * cur - prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

const TAIL_SPLIT: f64 = 2.0;

/// Upper Gaussian tail `∫_x^∞ e^{−t²/2} dt` (unnormalized).
pub fn gaussian_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= TAIL_SPLIT {
        (-0.5 * x * x).exp() * mills_cf(x)
    } else if x > -TAIL_SPLIT {
        (PI / 2.0).sqrt() - gaussian_head(x)
    } else {
        (2.0 * PI).sqrt() - gaussian_tail(-x)
    }
}

/// `ln ∫_x^∞ e^{−t²/2} dt`, finite for every finite `x`.
pub fn log_gaussian_tail(x: f64) -> f64 {
    if x >= TAIL_SPLIT {
        -0.5 * x * x + mills_cf(x).ln()
    } else {
        gaussian_tail(x).ln()
    }
}

/// Scaled tail `e^{x²/2} ∫_x^∞ e^{−t²/2} dt` for `x ≥ 0` (the unnormalized
/// Mills ratio). No overflow for large `x`.
pub fn mills_ratio(x: f64) -> f64 {
    if x >= TAIL_SPLIT {
        mills_cf(x)
    } else {
        (0.5 * x * x).exp() * gaussian_tail(x)
    }
}

// ∫_0^x e^{-t²/2} dt = e^{-x²/2} Σ x^{2n+1} / (2n+1)!!, all terms positive.
fn gaussian_head(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    while term.abs() > 1e-17 * sum.abs() {
        n += 1;
        term *= x2 / (2 * n + 1) as f64;
        sum += term;
        if n > 500 {
            break;
        }
    }
    (-0.5 * x2).exp() * sum
}

// Laplace continued fraction 1/(x + 1/(x + 2/(x + 3/(x + …)))), x ≥ 2.
fn mills_cf(x: f64) -> f64 {
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..10_000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = x + a / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 0.5 * f64::EPSILON {
            break;
        }
    }
    1.0 / f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_hermite_normal, Integrator};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Ratio of integrals form of I_{α+1}/I_α, evaluated on θ ∈ [0, π] so the
    // (1−t²)^{α−1/2} weight is smooth.
    fn bessel_ratio_by_quadrature(alpha: f64, a: f64) -> f64 {
        let q = Integrator::new(1e-15, 1e-13);
        let num = q
            .integrate(
                |th: f64| (a * (th.cos() - 1.0)).exp() * th.sin().powf(2.0 * alpha + 2.0),
                0.0,
                PI,
            )
            .unwrap();
        let den = q
            .integrate(
                |th: f64| (a * (th.cos() - 1.0)).exp() * th.sin().powf(2.0 * alpha),
                0.0,
                PI,
            )
            .unwrap();
        a / (2.0 * alpha + 1.0) * num / den
    }

    #[test]
    fn bessel_ratio_zero_argument() {
        for alpha in [0.0, 0.5, 3.0] {
            assert_eq!(bessel_ratio(alpha, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn bessel_ratio_half_integer_closed_form() {
        let v = bessel_ratio(0.5, 2.0).unwrap();
        let closed = 1.0 / 2f64.tanh() - 0.5;
        assert!(rel(v, closed) < 1e-14);
        assert!((v - 0.537_314).abs() < 1e-6);
        assert!(rel(v, bessel_ratio_by_quadrature(0.5, 2.0)) < 1e-11);
    }

    #[test]
    fn bessel_ratio_matches_integral_ratio() {
        for &alpha in &[0.0, 0.5, 1.0, 2.5, 7.0] {
            for &a in &[0.01, 0.3, 1.0, 4.0, 15.0] {
                let v = bessel_ratio(alpha, a).unwrap();
                let q = bessel_ratio_by_quadrature(alpha, a);
                assert!(rel(v, q) < 1e-10, "alpha={alpha} a={a}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn bessel_ratio_rejects_bad_input() {
        assert!(bessel_ratio(-0.1, 1.0).is_err());
        assert!(bessel_ratio(0.5, -1.0).is_err());
        assert!(bessel_ratio(0.5, f64::NAN).is_err());
        assert!(bessel_ratio(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn bessel_ratio_large_argument_stays_below_one() {
        for &a in &[1e3, 1e4, 1e5] {
            let v = bessel_ratio(0.5, a).unwrap();
            assert!(v < 1.0 && v > 0.99);
            assert!(rel(v, langevin(a)) < 1e-12);
        }
    }

    #[test]
    fn amos_sandwich_examples() {
        for &alpha in &[0.5, 1.0, 1.5] {
            for &a in &[0.01, 0.1, 1.0, 10.0, 100.0] {
                let v = bessel_ratio(alpha, a).unwrap();
                let lower = a / (alpha + 1.0 + ((alpha + 1.0).powi(2) + a * a).sqrt());
                let upper = a / (alpha + (alpha * alpha + a * a).sqrt());
                assert!(lower <= v && v <= upper, "alpha={alpha} a={a}");
            }
        }
    }

    #[test]
    fn langevin_small_argument() {
        let v = langevin(1e-6);
        assert!((3.3e-7..=3.4e-7).contains(&v));
        assert!(rel(v, 1e-6 / 3.0) < 1e-12);
        assert_eq!(langevin(0.0), 0.0);
    }

    #[test]
    fn langevin_at_one_matches_integral_ratio() {
        // (a/2) ∫(1−t²)e^{at} / ∫e^{at}
        let q = Integrator::new(1e-15, 1e-14);
        let num = q.integrate(|t| (1.0 - t * t) * t.exp(), -1.0, 1.0).unwrap();
        let den = q.integrate(|t| t.exp(), -1.0, 1.0).unwrap();
        let oracle = 0.5 * num / den;
        assert!((oracle - 0.313_035_3).abs() < 1e-7);
        assert!(rel(langevin(1.0), oracle) < 1e-13);
    }

    #[test]
    fn langevin_series_seam_is_continuous() {
        let below = langevin(LANGEVIN_SERIES_CUTOFF * (1.0 - 1e-12));
        let above = langevin(LANGEVIN_SERIES_CUTOFF);
        assert!(rel(below, above) < 1e-11);
    }

    #[test]
    fn langevin_approaches_one() {
        let mut prev = 0.0;
        for &a in &[1.0, 10.0, 100.0, 1e4, 1e8] {
            let v = langevin(a);
            assert!(v > prev && v < 1.0);
            prev = v;
        }
        assert_eq!(langevin(1e300), 1.0);
    }

    #[test]
    fn rising_factorial_examples() {
        assert_eq!(rising_factorial(3.7, 0), 1.0);
        assert_eq!(rising_factorial(1.0, 3), 6.0);
        assert_eq!(rising_factorial(3.0, 2), 12.0);
    }

    #[test]
    fn gegenbauer_examples() {
        for &t in &[-1.0, -0.3, 0.0, 0.8] {
            assert_eq!(gegenbauer(0, 1.7, t).unwrap(), 1.0);
        }
        assert!((gegenbauer(2, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gegenbauer(2, 0.5, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!(gegenbauer(2, 0.5, 1.5).is_err());
        assert!(gegenbauer(2, -0.5, 0.5).is_err());
    }

    #[test]
    fn gegenbauer_endpoint_value() {
        // C_d^{(n/2-1)}(1) = (n-2)_d / d!
        for n in 3..8u32 {
            let alpha = n as f64 / 2.0 - 1.0;
            for d in 0..10u32 {
                let expected = rising_factorial((n - 2) as f64, d) / rising_factorial(1.0, d);
                let got = gegenbauer(d, alpha, 1.0).unwrap();
                assert!(rel(got, expected) < 1e-13, "n={n} d={d}");
            }
        }
    }

    // Rodrigues: (1−t²)^{α−1/2} C_d(t) = (−2)^d (α)_d / (d! (d+2α)_d) · D^d (1−t²)^{α+d−1/2}.
    // The derivative is expanded symbolically over terms c·t^j·(1−t²)^{p−m}.
    fn gegenbauer_by_rodrigues(d: u32, alpha: f64, t: f64) -> f64 {
        let p0 = alpha + d as f64 - 0.5;
        let mut terms: Vec<(f64, i32, u32)> = vec![(1.0, 0, 0)];
        for _ in 0..d {
            let mut next = Vec::new();
            for &(c, j, m) in &terms {
                if j > 0 {
                    next.push((c * j as f64, j - 1, m));
                }
                next.push((-2.0 * c * (p0 - m as f64), j + 1, m + 1));
            }
            terms = next;
        }
        let u = 1.0 - t * t;
        let deriv_over_weight: f64 = terms
            .iter()
            .map(|&(c, j, m)| c * t.powi(j) * u.powi((d - m) as i32))
            .sum();
        let fact = rising_factorial(1.0, d);
        (-2f64).powi(d as i32) * rising_factorial(alpha, d) / (fact * rising_factorial(d as f64 + 2.0 * alpha, d))
            * deriv_over_weight
    }

    #[test]
    fn gegenbauer_recurrence_matches_rodrigues() {
        for &alpha in &[0.5, 1.0, 1.5, 0.25] {
            for d in 0..=4 {
                for i in 0..20 {
                    let t = -0.95 + 1.9 * i as f64 / 19.0;
                    let rec = gegenbauer(d, alpha, t).unwrap();
                    let rod = gegenbauer_by_rodrigues(d, alpha, t);
                    assert!((rec - rod).abs() < 1e-9, "alpha={alpha} d={d} t={t}");
                }
            }
        }
        assert!((gegenbauer_by_rodrigues(2, 0.5, 0.0) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_normalized_chebyshev_limit() {
        for &t in &[-0.9, -0.2, 0.4, 1.0] {
            let th = f64::acos(t);
            for d in 0..6 {
                let v = gegenbauer_normalized(d, 0.0, t).unwrap();
                assert!((v - (d as f64 * th).cos()).abs() < 1e-13);
                let near = gegenbauer_normalized(d, 1e-9, t).unwrap();
                assert!((near - v).abs() < 1e-7, "d={d} t={t}: {near} vs {v}");
            }
        }
    }

    #[test]
    fn hermite_low_degree() {
        for &x in &[-2.0, 0.0, 0.7, 3.0] {
            assert_eq!(hermite(0, x), 1.0);
            assert_eq!(hermite(1, x), x);
            assert!((hermite(2, x) - (x * x / 2.0 - 0.5)).abs() < 1e-15);
        }
    }

    fn hermite_by_sum(m: u32, x: f64) -> f64 {
        let fact = |k: u32| (1..=k).fold(1.0, |a, j| a * j as f64);
        (0..=m / 2)
            .map(|k| {
                x.powi((m - 2 * k) as i32) * (-1f64).powi(k as i32) * 0.5f64.powi(k as i32)
                    / (fact(k) * fact(m - 2 * k))
            })
            .sum()
    }

    #[test]
    fn hermite_recurrence_matches_sum_formula() {
        for m in 0..16 {
            for &x in &[-1.5, -0.2, 0.0, 0.9, 2.2] {
                let a = hermite(m, x);
                let b = hermite_by_sum(m, x);
                assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn hermite_orthonormality() {
        let rule = gauss_hermite_normal(40);
        let fact = |k: u32| (1..=k).fold(1.0, |a, j| a * j as f64);
        let norm = rule.apply(|x| (fact(2).sqrt() * hermite(2, x)).powi(2));
        assert!((norm - 1.0).abs() < 1e-10);
        for i in 0..=10u32 {
            for j in 0..=10u32 {
                let ip = rule.apply(|x| fact(i).sqrt() * hermite(i, x) * fact(j).sqrt() * hermite(j, x));
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((ip - delta).abs() <= 1e-9, "i={i} j={j}: {ip}");
            }
        }
    }

    #[test]
    fn gaussian_tail_values() {
        assert!((gaussian_tail(0.0) - (PI / 2.0).sqrt()).abs() < 1e-15);
        assert!((gaussian_tail(0.0) - 1.253_314_1).abs() < 1e-7);
        let q = Integrator::new(1e-16, 1e-15);
        let oracle = q.integrate(|t| (-0.5 * t * t).exp(), 1.0, 40.0).unwrap();
        assert!((oracle - 0.397_689_7).abs() < 1e-7);
        assert!(rel(gaussian_tail(1.0), oracle) < 1e-12);
        for &x in &[-3.0, -1.9, 0.5, 1.99, 2.0, 2.5, 4.0, 7.0] {
            let oracle = q.integrate(|t| (-0.5 * t * t).exp(), x, 40.0).unwrap();
            assert!(rel(gaussian_tail(x), oracle) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn gaussian_tail_reflection() {
        for i in 0..=160 {
            let x = -8.0 + 0.1 * i as f64;
            let s = gaussian_tail(x) + gaussian_tail(-x);
            assert!((s - (2.0 * PI).sqrt()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn gaussian_tail_monotone_to_zero() {
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let x = -5.0 + 0.1 * i as f64;
            let v = gaussian_tail(x);
            assert!(v < prev && v >= 0.0);
            prev = v;
        }
        assert!(gaussian_tail(50.0) < 1e-500f64.max(1e-300));
    }

    #[test]
    fn log_tail_and_mills_are_finite_far_out() {
        let x = 1e5;
        let lt = log_gaussian_tail(x);
        assert!(lt.is_finite());
        assert!(rel(lt, -0.5 * x * x - x.ln()) < 1e-9);
        assert!(rel(mills_ratio(x), 1.0 / x) < 1e-9);
        for &x in &[0.0f64, 0.5, 1.9, 2.0, 3.0] {
            let direct = (0.5 * x * x).exp() * gaussian_tail(x);
            assert!(rel(mills_ratio(x), direct) < 1e-13);
        }
    }
}
