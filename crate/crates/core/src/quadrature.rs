//! Quadrature rules: adaptive Gauss–Kronrod on finite intervals, fixed
//! Gauss–Legendre and Gauss–Hermite rules, product rules on the unit sphere
//! and composite radial rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

// Kronrod abscissae on [0, 1); the odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 15-point Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 4000,
        }
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_pieces(f, &[a, b]).map(|(v, _)| v)
    }

    /// Integrates over consecutive breakpoints, returning `(value, error)`.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<(f64, f64)> {
        if breaks.len() < 2 {
            return Ok((0.0, 0.0));
        }
        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut err = 0.0;
        for w in breaks.windows(2) {
            let (value, error) = gk15(&f, w[0], w[1]);
            total += value;
            err += error;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
        loop {
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::Evaluation("non-finite integrand value in quadrature".into()));
            }
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                let value = heap.iter().map(|p| p.value).collect::<CompensatedSum>().value();
                let error: f64 = heap.iter().map(|p| p.error).sum();
                return Ok((value, error));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            let width_floor = 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1e-300);
            if heap.len() + 2 > self.max_panels || (worst.b - worst.a).abs() < width_floor {
                heap.push(worst);
                return Err(Error::Quadrature {
                    estimate: total,
                    error: err,
                    panels: heap.len(),
                });
            }
            let (lv, le) = gk15(&f, worst.a, mid);
            let (rv, re) = gk15(&f, mid, worst.b);
            total += lv + rv - worst.value;
            err += le + re - worst.error;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: rv,
                error: re,
            });
        }
    }
}

/// Fixed-order rule: nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect::<CompensatedSum>()
            .value()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    if n == 1 {
        return Rule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    Rule {
        nodes: base.nodes.iter().map(|&x| c + h * x).collect(),
        weights: base.weights.iter().map(|&w| h * w).collect(),
    }
}

/// `n`-point Gauss–Hermite rule for the standard normal probability
/// measure: `sum w_i f(x_i) ≈ ∫ f dγ₁`.
pub fn gauss_hermite_normal(n: usize) -> Rule {
    // Newton on orthonormal physicists' Hermite functions, then rescale.
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let scale = PI.sqrt();
    Rule {
        nodes: x.iter().rev().map(|&t| t * std::f64::consts::SQRT_2).collect(),
        weights: w.iter().rev().map(|&v| v / scale).collect(),
    }
}

/// Product rule on S² for the normalized surface measure: Gauss–Legendre in
/// `cos θ` times a uniform longitude grid.
#[derive(Debug, Clone)]
pub struct SphericalGrid {
    exact_degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SphericalGrid {
    /// A grid integrating every spherical polynomial of degree `≤ degree`
    /// exactly.
    pub fn exact_for(degree: usize) -> Self {
        let n_theta = degree / 2 + 1;
        let n_phi = degree + 1;
        let gl = gauss_legendre(n_theta);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (&z, &wz) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                points.push([s * phi.cos(), s * phi.sin(), z]);
                weights.push(0.5 * wz / n_phi as f64);
            }
        }
        Self {
            exact_degree: degree,
            points,
            weights,
        }
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean of a vector-valued function over the sphere.
    pub fn mean<const K: usize, F: Fn(&[f64; 3]) -> [f64; K]>(&self, f: F) -> [f64; K] {
        let mut acc = [CompensatedSum::new(); K];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let v = f(p);
            for c in 0..K {
                acc[c].add(w * v[c]);
            }
        }
        acc.map(|a| a.value())
    }
}

/// Chi distribution density with three degrees of freedom.
pub fn chi3_density(r: f64) -> f64 {
    (2.0 / PI).sqrt() * r * r * (-0.5 * r * r).exp()
}

/// Composite Gauss–Legendre rule over consecutive breakpoints.
pub fn composite_rule(breaks: &[f64], points_per_panel: usize) -> Rule {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        let panel = gauss_legendre_on(points_per_panel, w[0], w[1]);
        nodes.extend(panel.nodes);
        weights.extend(panel.weights);
    }
    Rule { nodes, weights }
}

/// Radial rule for `∫₀^∞ g(r) χ₃(r) dr`: composite Gauss–Legendre on
/// `[0, r_max]` with the chi(3) density folded into the weights. Extra
/// breakpoints (for instance shell radii of a piecewise-linear profile) are
/// merged in.
pub fn chi3_rule(extra_breaks: &[f64], r_max: f64, points_per_panel: usize) -> Rule {
    let mut breaks: Vec<f64> = vec![0.0];
    let uniform = 24usize;
    breaks.extend((1..=uniform).map(|i| r_max * i as f64 / uniform as f64));
    breaks.extend(extra_breaks.iter().copied().filter(|&b| b > 0.0 && b < r_max));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut rule = composite_rule(&breaks, points_per_panel);
    for (w, &r) in rule.weights.iter_mut().zip(&rule.nodes) {
        *w *= chi3_density(r);
    }
    rule
}
