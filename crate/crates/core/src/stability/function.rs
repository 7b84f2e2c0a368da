//! Sphere-valued functions on ℝ³: closed forms and the shell-harmonic
//! parametrization.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::SeededStream;
use crate::numeric::{geomspace, norm3};
use crate::quadrature::{chi3_rule, SphericalGrid};
use crate::sphharm::{harmonic_count, harmonic_index, real_harmonics};

/// Tolerance on `|‖f(x)‖ − 1|` for evaluated outputs.
pub const SPHERE_TOLERANCE: f64 = 1e-9;

/// Pre-projection norm deviation above which a shell-harmonic evaluation is
/// flagged.
pub const PROJECTION_FLAG: f64 = 0.2;

/// Default number of shells and their range.
pub const DEFAULT_SHELLS: usize = 64;
pub const SHELL_MIN: f64 = 0.05;
pub const SHELL_MAX: f64 = 8.0;

/// Largest harmonic degree accepted by [`ShellHarmonic`].
pub const MAX_SHELL_DEGREE: usize = 8;

pub const MAX_HARMONICS: usize = (MAX_SHELL_DEGREE + 1) * (MAX_SHELL_DEGREE + 1);

/// `geomspace(0.05, 8, shells)`.
pub fn default_shell_radii(shells: usize) -> Vec<f64> {
    geomspace(SHELL_MIN, SHELL_MAX, shells)
}

/// A function `ℝ³ → ℝ³` expanded in real spherical harmonics on each of a
/// grid of shells, linearly interpolated in the radius and then radially
/// projected to the unit sphere.
///
/// Coefficients are stored flat as `[shell][component][l² + l + m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellHarmonic {
    radii: Vec<f64>,
    degree: usize,
    coefficients: Vec<f64>,
}

/// Where a radius falls in the shell grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellLocation {
    pub lower: usize,
    /// Weight of shell `lower + 1`.
    pub weight: f64,
    pub clamped: bool,
}

impl ShellHarmonic {
    pub fn new(radii: Vec<f64>, degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::Invalid("at least two shells are required".into()));
        }
        if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) || !radii.iter().all(|r| r.is_finite()) {
            return Err(Error::Invalid(
                "shell radii must be positive and strictly increasing".into(),
            ));
        }
        if degree > MAX_SHELL_DEGREE {
            return Err(Error::SizeLimit {
                what: "harmonic degree",
                value: degree,
                max: MAX_SHELL_DEGREE,
            });
        }
        let expected = radii.len() * 3 * harmonic_count(degree);
        if coefficients.len() != expected {
            return Err(Error::Invalid(format!(
                "coefficient table has {} entries, expected {expected}",
                coefficients.len()
            )));
        }
        if !coefficients.iter().all(|c| c.is_finite()) {
            return Err(Error::Invalid("coefficients must be finite".into()));
        }
        Ok(Self {
            radii,
            degree,
            coefficients,
        })
    }

    /// The coefficients of `x ↦ x/‖x‖` on the given shells.
    pub fn fopt(radii: Vec<f64>, degree: usize) -> Result<Self> {
        let h = harmonic_count(degree);
        let mut c = vec![0.0; radii.len() * 3 * h];
        if degree >= 1 {
            let inv = 1.0 / 3f64.sqrt();
            for shell in 0..radii.len() {
                for (comp, m) in [(0, 1), (1, -1), (2, 0)] {
                    c[(shell * 3 + comp) * h + harmonic_index(1, m)] = inv;
                }
            }
        }
        Self::new(radii, degree, c)
    }

    /// `x/‖x‖` plus independent `N(0, amplitude²)` perturbations of every
    /// coefficient.
    pub fn random(radii: Vec<f64>, degree: usize, amplitude: f64, stream: &SeededStream) -> Result<Self> {
        let mut f = Self::fopt(radii, degree)?;
        let mut rng = stream.rng();
        for c in &mut f.coefficients {
            let z: f64 = rng.sample(StandardNormal);
            *c += amplitude * z;
        }
        Ok(f)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn shells(&self) -> usize {
        self.radii.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn harmonics_per_component(&self) -> usize {
        harmonic_count(self.degree)
    }

    /// Flat position of coefficient `(shell, component, harmonic)`.
    #[inline]
    pub fn offset(&self, shell: usize, component: usize, harmonic: usize) -> usize {
        (shell * 3 + component) * self.harmonics_per_component() + harmonic
    }

    pub fn locate(&self, r: f64) -> ShellLocation {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return ShellLocation {
                lower: 0,
                weight: 0.0,
                clamped: r < self.radii[0],
            };
        }
        if r >= self.radii[n - 1] {
            return ShellLocation {
                lower: n - 2,
                weight: 1.0,
                clamped: r > self.radii[n - 1],
            };
        }
        let upper = self.radii.partition_point(|&t| t <= r);
        let lower = upper - 1;
        ShellLocation {
            lower,
            weight: (r - self.radii[lower]) / (self.radii[upper] - self.radii[lower]),
            clamped: false,
        }
    }

    /// Pre-projection value `v(x)` together with the harmonics at `x/‖x‖`
    /// and the shell location.
    pub fn raw_with_basis(&self, x: &[f64; 3], basis: &mut [f64]) -> ([f64; 3], ShellLocation) {
        let r = norm3(x);
        let u = if r > 0.0 {
            [x[0] / r, x[1] / r, x[2] / r]
        } else {
            [0.0, 0.0, 1.0]
        };
        let h = self.harmonics_per_component();
        real_harmonics(self.degree, &u, &mut basis[..h]);
        let loc = self.locate(r);
        let mut v = [0.0; 3];
        for (shell, w) in [(loc.lower, 1.0 - loc.weight), (loc.lower + 1, loc.weight)] {
            if w == 0.0 {
                continue;
            }
            for (comp, vc) in v.iter_mut().enumerate() {
                let start = self.offset(shell, comp, 0);
                let row = &self.coefficients[start..start + h];
                *vc += w * row.iter().zip(&basis[..h]).map(|(c, y)| c * y).sum::<f64>();
            }
        }
        (v, loc)
    }

    /// Pre-projection value `v(x)`.
    pub fn raw(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut basis = [0.0; MAX_HARMONICS];
        self.raw_with_basis(x, &mut basis).0
    }
}

/// Projects `v` to the unit sphere; a zero vector yields NaNs.
#[inline]
pub fn project(v: [f64; 3]) -> ([f64; 3], f64) {
    let n = norm3(&v);
    ([v[0] / n, v[1] / n, v[2] / n], n)
}

type VectorMap = dyn Fn(&[f64; 3]) -> [f64; 3] + Send + Sync;

/// A (claimed) sphere-valued function on ℝ³.
#[derive(Clone)]
pub enum SphereFunction {
    /// A constant unit vector.
    Constant([f64; 3]),
    /// `x ↦ M x / ‖x‖` for an orthogonal `M`, with rows `M[i]`.
    Orthogonal([[f64; 3]; 3]),
    /// `inner` on `‖x‖ < split`, `outer` elsewhere.
    Piecewise {
        split: f64,
        inner: Box<SphereFunction>,
        outer: Box<SphereFunction>,
    },
    ShellHarmonic(ShellHarmonic),
    /// `x ↦ f(−x)`.
    Reflected(Box<SphereFunction>),
    /// Any user closure; it is checked, not trusted.
    Custom {
        name: String,
        map: Arc<VectorMap>,
    },
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Orthogonal(m) => f.debug_tuple("Orthogonal").field(m).finish(),
            Self::Piecewise { split, inner, outer } => f
                .debug_struct("Piecewise")
                .field("split", split)
                .field("inner", inner)
                .field("outer", outer)
                .finish(),
            Self::ShellHarmonic(s) => f
                .debug_struct("ShellHarmonic")
                .field("shells", &s.shells())
                .field("degree", &s.degree())
                .finish(),
            Self::Reflected(inner) => f.debug_tuple("Reflected").field(inner).finish(),
            Self::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

impl SphereFunction {
    /// `x ↦ x/‖x‖`.
    pub fn fopt() -> Self {
        Self::Orthogonal(IDENTITY)
    }

    /// Constant map; the vector is normalized.
    pub fn constant(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Invalid("constant value must be a nonzero finite vector".into()));
        }
        Ok(Self::Constant([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// `x ↦ M x/‖x‖`; `M` must be orthogonal to `1e-9`.
    pub fn orthogonal(m: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                let g: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-9 {
                    return Err(Error::Invalid(format!(
                        "matrix is not orthogonal: (MᵀM)[{i}][{j}] = {g}"
                    )));
                }
            }
        }
        Ok(Self::Orthogonal(m))
    }

    pub fn piecewise(split: f64, inner: SphereFunction, outer: SphereFunction) -> Result<Self> {
        if !(split > 0.0 && split.is_finite()) {
            return Err(Error::Invalid("split radius must be positive".into()));
        }
        Ok(Self::Piecewise {
            split,
            inner: Box::new(inner),
            outer: Box::new(outer),
        })
    }

    /// `x ↦ self(−x)`.
    pub fn reflected(self) -> Self {
        Self::Reflected(Box::new(self))
    }

    pub fn custom<F>(name: impl Into<String>, map: F) -> Self
    where
        F: Fn(&[f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    {
        Self::Custom {
            name: name.into(),
            map: Arc::new(map),
        }
    }

    /// `f(x)` and the pre-projection norm (1 for closed forms).
    pub fn eval_with_norm(&self, x: &[f64; 3]) -> ([f64; 3], f64) {
        match self {
            Self::Constant(v) => (*v, 1.0),
            Self::Orthogonal(m) => {
                let r = norm3(x);
                if r == 0.0 {
                    return ([m[0][2], m[1][2], m[2][2]], 1.0);
                }
                let v = std::array::from_fn(|i| (m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2]) / r);
                (v, 1.0)
            }
            Self::Piecewise { split, inner, outer } => {
                if norm3(x) < *split {
                    inner.eval_with_norm(x)
                } else {
                    outer.eval_with_norm(x)
                }
            }
            Self::ShellHarmonic(s) => project(s.raw(x)),
            Self::Reflected(inner) => inner.eval_with_norm(&[-x[0], -x[1], -x[2]]),
            Self::Custom { map, .. } => (map(x), 1.0),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        self.eval_with_norm(x).0
    }

    /// `f(x)`, or an error if it is not a unit vector.
    pub fn eval_checked(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        let v = self.eval(x);
        let n = norm3(&v);
        if (n - 1.0).abs() > SPHERE_TOLERANCE || !n.is_finite() {
            return Err(Error::NotSphereValued { norm: n, point: *x });
        }
        Ok(v)
    }

    /// Radii at which the function may be discontinuous or kinked in `‖x‖`.
    pub fn radial_breaks(&self) -> Vec<f64> {
        match self {
            Self::Piecewise { split, inner, outer } => {
                let mut b = vec![*split];
                b.extend(inner.radial_breaks());
                b.extend(outer.radial_breaks());
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            Self::ShellHarmonic(s) => s.radii().to_vec(),
            Self::Reflected(inner) => inner.radial_breaks(),
            _ => Vec::new(),
        }
    }

    /// Harmonic degree of the angular dependence where finite.
    pub fn angular_degree(&self) -> Option<usize> {
        match self {
            Self::Constant(_) => Some(0),
            Self::Orthogonal(_) => Some(1),
            Self::Piecewise { inner, outer, .. } => Some(inner.angular_degree()?.max(outer.angular_degree()?)),
            Self::ShellHarmonic(s) => Some(s.degree()),
            Self::Reflected(inner) => inner.angular_degree(),
            Self::Custom { .. } => None,
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            Self::Constant(v) => format!("constant({:.6}, {:.6}, {:.6})", v[0], v[1], v[2]),
            Self::Orthogonal(m) if *m == IDENTITY => "fopt".into(),
            Self::Orthogonal(_) => "orthogonal".into(),
            Self::Piecewise { split, inner, outer } => {
                format!("piecewise({split}; {}; {})", inner.label(), outer.label())
            }
            Self::ShellHarmonic(s) => format!("shell_harmonic(shells={}, degree={})", s.shells(), s.degree()),
            Self::Reflected(inner) => format!("reflected({})", inner.label()),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    /// `E_γ f` by a chi(3) radial rule times a spherical rule.
    pub fn gaussian_mean(&self, radial_points: usize, sphere_degree: usize) -> [f64; 3] {
        let rule = chi3_rule(&self.radial_breaks(), 12.0, radial_points);
        let grid = SphericalGrid::exact_for(sphere_degree);
        let mut acc = [0.0; 3];
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let m = grid.mean(|u| self.eval(&[r * u[0], r * u[1], r * u[2]]));
            for c in 0..3 {
                acc[c] += w * m[c];
            }
        }
        acc
    }
}

impl From<ShellHarmonic> for SphereFunction {
    fn from(s: ShellHarmonic) -> Self {
        Self::ShellHarmonic(s)
    }
}

/// Shifts every shell's degree-0 coefficients by a common vector until
/// `E_γ f = 0` (Newton's method with a finite-difference Jacobian).
///
/// Returns the final `‖E_γ f‖`.
pub fn recenter(f: &mut ShellHarmonic, sphere_degree: usize, tol: f64) -> Result<f64> {
    const MAX_ITER: usize = 30;
    let mean = |g: &ShellHarmonic| SphereFunction::ShellHarmonic(g.clone()).gaussian_mean(4, sphere_degree);
    let shift = |g: &mut ShellHarmonic, d: [f64; 3]| {
        for shell in 0..g.shells() {
            for (comp, dc) in d.iter().enumerate() {
                let k = g.offset(shell, comp, 0);
                g.coefficients[k] += dc;
            }
        }
    };
    let mut m = mean(f);
    for _ in 0..MAX_ITER {
        let size = norm3(&m);
        if !size.is_finite() {
            return Err(Error::Evaluation(
                "Gaussian mean is not finite during recentering".into(),
            ));
        }
        if size <= tol {
            return Ok(size);
        }
        let h = 1e-6;
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut probe = f.clone();
            let mut e = [0.0; 3];
            e[j] = h;
            shift(&mut probe, e);
            let mp = mean(&probe);
            for i in 0..3 {
                jac[i][j] = (mp[i] - m[i]) / h;
            }
        }
        let jm = nalgebra::Matrix3::from_fn(|i, j| jac[i][j]);
        let rhs = nalgebra::Vector3::new(-m[0], -m[1], -m[2]);
        let step = jm
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Evaluation("singular Jacobian while recentering".into()))?;
        let mut step = [step[0], step[1], step[2]];
        let len = norm3(&step);
        if len > 0.5 {
            step.iter_mut().for_each(|s| *s *= 0.5 / len);
        }
        shift(f, step);
        m = mean(f);
    }
    let size = norm3(&m);
    if size <= tol {
        Ok(size)
    } else {
        Err(Error::NotConverged {
            routine: "recenter",
            iterations: MAX_ITER,
        })
    }
}

/// Serializable description of a function, as read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Fopt,
    Constant {
        value: [f64; 3],
    },
    Orthogonal {
        matrix: [[f64; 3]; 3],
    },
    Piecewise {
        split: f64,
        inner: Box<FunctionSpec>,
        outer: Box<FunctionSpec>,
    },
    ShellHarmonic {
        radii: Vec<f64>,
        degree: usize,
        coefficients: Vec<f64>,
    },
    Random {
        seed: u64,
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default = "default_shells")]
        shells: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        mean_zero: bool,
    },
}

fn default_degree() -> usize {
    2
}

fn default_shells() -> usize {
    DEFAULT_SHELLS
}

fn default_amplitude() -> f64 {
    0.3
}

impl FunctionSpec {
    pub fn build(&self) -> Result<SphereFunction> {
        Ok(match self {
            Self::Fopt => SphereFunction::fopt(),
            Self::Constant { value } => SphereFunction::constant(*value)?,
            Self::Orthogonal { matrix } => SphereFunction::orthogonal(*matrix)?,
            Self::Piecewise { split, inner, outer } => {
                SphereFunction::piecewise(*split, inner.build()?, outer.build()?)?
            }
            Self::ShellHarmonic {
                radii,
                degree,
                coefficients,
            } => ShellHarmonic::new(radii.clone(), *degree, coefficients.clone())?.into(),
            Self::Random {
                seed,
                degree,
                shells,
                amplitude,
                mean_zero,
            } => {
                let mut f = ShellHarmonic::random(
                    default_shell_radii(*shells),
                    *degree,
                    *amplitude,
                    &SeededStream::new(*seed, 0),
                )?;
                if *mean_zero {
                    recenter(&mut f, 2 * degree + 8, 1e-12)?;
                }
                f.into()
            }
        })
    }
}
