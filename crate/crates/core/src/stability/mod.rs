//! Noise stability of sphere-valued functions: Monte Carlo and spectral
//! estimators, the `f_opt` benchmark, radial mean profiles and the bound
//! expressions for `E⟨f(X), f(Y)⟩` and `E⟨f(X), g(Y)⟩`.

pub mod function;
pub mod mc;
pub mod profile;
pub mod spectral;

use serde::{Deserialize, Serialize};

pub use function::{
    default_shell_radii, recenter, FunctionSpec, ShellHarmonic, SphereFunction, DEFAULT_SHELLS, PROJECTION_FLAG,
    SPHERE_TOLERANCE,
};
pub use mc::{
    bilinear_bound_rhs, bilinear_bound_rhs_with, bilinear_lemma_check, noise_stability_mc, quadratic_bound_rhs,
    quadratic_bound_rhs_with, quadratic_lemma_check, LemmaCheck,
};
pub use profile::{default_profile, radial_mean_profile, RadialMeanProfile};
pub use spectral::{
    fopt_stability, fopt_stability_estimate, gaussian_spectral_stability, spherical_noise_stability,
    spherical_noise_stability_on,
};

/// How an estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Spectral,
    Quadrature,
}

/// A value with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub method: Method,
    pub value: f64,
    pub std_error: f64,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl StabilityEstimate {
    /// A deterministic value (zero standard error).
    pub fn exact(method: Method, value: f64) -> Self {
        Self {
            method,
            value,
            std_error: 0.0,
            count: 0,
            seed: None,
            flags: Vec::new(),
        }
    }

    /// `|value − target| ≤ k σ̂`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}
