//! Projected gradient ascent on noise stability over shell-harmonic
//! functions with `E_γ f = 0`, looking for anything beating `f_opt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measures::{sample_gaussian_pairs3, SeededStream};
use crate::numeric::dot3;
use crate::stability::function::{project, MAX_HARMONICS, PROJECTION_FLAG};
use crate::stability::{
    default_shell_radii, fopt_stability, noise_stability_mc, recenter, ShellHarmonic, SphereFunction, StabilityEstimate,
};

/// Pre-projection norm treated as a blow-up.
pub const DIVERGENCE_NORM: f64 = 1e6;

const PAIRS_PER_TASK: usize = 4096;

/// Starting point of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchInit {
    Fopt,
    Random { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub rho: f64,
    pub degree: usize,
    pub shells: usize,
    pub iterations: usize,
    /// Fixed pairs used for the objective and its gradient.
    pub train_count: usize,
    /// Fresh pairs per iteration for an unbiased estimate (0 disables).
    pub validation_count: usize,
    /// Fresh pairs for the terminal estimate.
    pub final_count: usize,
    pub step: f64,
    /// Halvings allowed before an iteration is declared stalled.
    pub max_halvings: usize,
    pub init: SearchInit,
}

impl SearchConfig {
    pub fn new(rho: f64, init: SearchInit) -> Self {
        Self {
            rho,
            degree: 2,
            shells: 16,
            iterations: 40,
            train_count: 1_000_000,
            validation_count: 100_000,
            final_count: 1_000_000,
            step: 0.05,
            max_halvings: 6,
            init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchIteration {
    pub iteration: usize,
    /// Training objective after the step.
    pub objective: f64,
    pub step: f64,
    pub halvings: usize,
    pub accepted: bool,
    pub gradient_norm: f64,
    /// Size of the degree-0 shift that restored `E_γ f = 0`.
    pub mean_correction: f64,
    /// Fraction of training evaluations whose pre-projection norm is off by
    /// more than 0.2.
    pub projection_flagged: f64,
    pub max_norm_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<StabilityEstimate>,
    /// `validation − fopt_stability(ρ)` when validation ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub config: SearchConfig,
    pub seed: u64,
    pub fopt_stability: f64,
    pub initial_objective: f64,
    pub trace: Vec<SearchIteration>,
    pub best_validation: Option<StabilityEstimate>,
    pub terminal: StabilityEstimate,
    /// `terminal − fopt_stability`.
    pub excess: f64,
    /// `excess / σ̂`.
    pub excess_sigmas: f64,
    /// `excess > 5 σ̂`.
    pub significant_excess: bool,
    pub function: ShellHarmonic,
}

struct Evaluation {
    objective: f64,
    gradient: Vec<f64>,
    flagged: f64,
    max_dev: f64,
    max_norm: f64,
}

// Objective and its gradient over the fixed pairs; tasks are reduced in order.
fn evaluate(f: &ShellHarmonic, pairs: &[([f64; 3], [f64; 3])], with_gradient: bool) -> Evaluation {
    let h = f.harmonics_per_component();
    let dim = f.coefficients().len();
    let parts: Vec<Evaluation> = pairs
        .par_chunks(PAIRS_PER_TASK)
        .map(|chunk| {
            let mut grad = if with_gradient { vec![0.0; dim] } else { Vec::new() };
            let (mut obj, mut flagged, mut max_dev, mut max_norm) = (0.0, 0.0, 0.0f64, 0.0f64);
            let mut bx = [0.0; MAX_HARMONICS];
            let mut by = [0.0; MAX_HARMONICS];
            for (x, y) in chunk {
                let (vx, lx) = f.raw_with_basis(x, &mut bx);
                let (vy, ly) = f.raw_with_basis(y, &mut by);
                let (fx, nx) = project(vx);
                let (fy, ny) = project(vy);
                obj += dot3(&fx, &fy);
                for n in [nx, ny] {
                    let dev = (n - 1.0).abs();
                    max_dev = max_dev.max(dev);
                    max_norm = max_norm.max(if n.is_finite() { n } else { f64::INFINITY });
                    if dev > PROJECTION_FLAG {
                        flagged += 0.5;
                    }
                }
                if !with_gradient {
                    continue;
                }
                for (fa, fb, na, loc, basis) in [(fx, fy, nx, lx, &bx), (fy, fx, ny, ly, &by)] {
                    let along = dot3(&fa, &fb);
                    let g: [f64; 3] = std::array::from_fn(|c| (fb[c] - along * fa[c]) / na);
                    for (shell, w) in [(loc.lower, 1.0 - loc.weight), (loc.lower + 1, loc.weight)] {
                        if w == 0.0 {
                            continue;
                        }
                        for (c, gc) in g.iter().enumerate() {
                            let start = f.offset(shell, c, 0);
                            let scale = w * gc;
                            for (dst, yv) in grad[start..start + h].iter_mut().zip(&basis[..h]) {
                                *dst += scale * yv;
                            }
                        }
                    }
                }
            }
            Evaluation {
                objective: obj,
                gradient: grad,
                flagged,
                max_dev,
                max_norm,
            }
        })
        .collect();
    let n = pairs.len() as f64;
    let mut total = Evaluation {
        objective: 0.0,
        gradient: if with_gradient { vec![0.0; dim] } else { Vec::new() },
        flagged: 0.0,
        max_dev: 0.0,
        max_norm: 0.0,
    };
    for p in parts {
        total.objective += p.objective;
        total.flagged += p.flagged;
        total.max_dev = total.max_dev.max(p.max_dev);
        total.max_norm = total.max_norm.max(p.max_norm);
        for (t, g) in total.gradient.iter_mut().zip(&p.gradient) {
            *t += g;
        }
    }
    total.objective /= n;
    total.flagged /= n;
    total.gradient.iter_mut().for_each(|g| *g /= n);
    total
}

fn divergence(iteration: usize, reason: String, f: &ShellHarmonic) -> Error {
    Error::Divergence {
        iteration,
        reason,
        state: serde_json::to_string(f).unwrap_or_else(|e| format!("state not serializable: {e}")),
    }
}

fn sphere_degree(f: &ShellHarmonic) -> usize {
    2 * f.degree() + 8
}

fn recenter_or_diverge(f: &mut ShellHarmonic, iteration: usize) -> Result<f64> {
    let before: Vec<f64> = f.coefficients().to_vec();
    match recenter(f, sphere_degree(f), 1e-12) {
        Ok(_) => {
            let h = f.harmonics_per_component();
            let shift: f64 = (0..3)
                .map(|c| (f.coefficients()[c * h] - before[c * h]).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(shift)
        }
        Err(e) => Err(divergence(iteration, format!("mean subtraction failed: {e}"), f)),
    }
}

/// Runs the search. Stream ids: training pairs `stream.stream_id`,
/// validation at iteration `k` uses `stream_id + 1 + k`, the terminal
/// estimate `stream_id + 1_000_000`; random initial coefficients come from
/// `stream_id + 2_000_000`.
pub fn perturbation_search(config: &SearchConfig, stream: &SeededStream) -> Result<SearchRecord> {
    let rho = config.rho;
    if !(0.0..0.104).contains(&rho) {
        return Err(domain("rho", rho, "in [0, 0.104)"));
    }
    if config.train_count == 0 || config.final_count < 2 {
        return Err(Error::Invalid(
            "training and terminal sample counts must be positive".into(),
        ));
    }
    if !(config.step > 0.0 && config.step.is_finite()) {
        return Err(domain("step", config.step, "finite and > 0"));
    }
    let radii = default_shell_radii(config.shells);
    let mut f = match config.init {
        SearchInit::Fopt => ShellHarmonic::fopt(radii, config.degree)?,
        SearchInit::Random { amplitude } => ShellHarmonic::random(
            radii,
            config.degree,
            amplitude,
            &stream.with_stream(stream.stream_id + 2_000_000),
        )?,
    };
    recenter_or_diverge(&mut f, 0)?;
    let fopt = fopt_stability(rho)?;
    let pairs = sample_gaussian_pairs3(rho, stream, config.train_count)?;
    let mut current = evaluate(&f, &pairs, true);
    let initial_objective = current.objective;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut best_validation: Option<StabilityEstimate> = None;

    for iteration in 1..=config.iterations {
        let gnorm = current.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !gnorm.is_finite() {
            return Err(divergence(iteration, "gradient is not finite".into(), &f));
        }
        let mut step = config.step;
        let mut halvings = 0;
        let mut accepted = None;
        if gnorm > 0.0 {
            loop {
                let mut trial = f.clone();
                for (c, g) in trial.coefficients_mut().iter_mut().zip(&current.gradient) {
                    *c += step * g / gnorm;
                }
                let correction = recenter_or_diverge(&mut trial, iteration)?;
                let eval = evaluate(&trial, &pairs, true);
                if !(eval.max_norm <= DIVERGENCE_NORM) {
                    return Err(divergence(
                        iteration,
                        format!("pre-projection norm {} exceeds {DIVERGENCE_NORM}", eval.max_norm),
                        &trial,
                    ));
                }
                if eval.objective >= current.objective {
                    accepted = Some((trial, eval, correction));
                    break;
                }
                if halvings == config.max_halvings {
                    break;
                }
                halvings += 1;
                step *= 0.5;
            }
        }
        let was_accepted = accepted.is_some();
        let mut correction = 0.0;
        if let Some((trial, eval, corr)) = accepted {
            f = trial;
            current = eval;
            correction = corr;
        }
        let validation = if config.validation_count > 1 {
            let v = noise_stability_mc(
                &SphereFunction::ShellHarmonic(f.clone()),
                None,
                rho,
                &stream.with_stream(stream.stream_id + 1 + iteration as u64),
                config.validation_count,
            )?;
            if best_validation.as_ref().is_none_or(|b| v.value > b.value) {
                best_validation = Some(v.clone());
            }
            Some(v)
        } else {
            None
        };
        trace.push(SearchIteration {
            iteration,
            objective: current.objective,
            step: if was_accepted { step } else { 0.0 },
            halvings,
            accepted: was_accepted,
            gradient_norm: gnorm,
            mean_correction: correction,
            projection_flagged: current.flagged,
            max_norm_deviation: current.max_dev,
            gap: validation.as_ref().map(|v| v.value - fopt),
            validation,
        });
        if !was_accepted {
            break;
        }
    }

    let terminal = noise_stability_mc(
        &SphereFunction::ShellHarmonic(f.clone()),
        None,
        rho,
        &stream.with_stream(stream.stream_id + 1_000_000),
        config.final_count,
    )?;
    let excess = terminal.value - fopt;
    let excess_sigmas = if terminal.std_error > 0.0 {
        excess / terminal.std_error
    } else if excess > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(SearchRecord {
        config: config.clone(),
        seed: stream.seed,
        fopt_stability: fopt,
        initial_objective,
        trace,
        best_validation,
        significant_excess: excess > 5.0 * terminal.std_error,
        excess,
        excess_sigmas,
        terminal,
        function: f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(rho: f64, init: SearchInit) -> SearchConfig {
        SearchConfig {
            iterations: 5,
            train_count: 20_000,
            validation_count: 50_000,
            final_count: 200_000,
            ..SearchConfig::new(rho, init)
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = ShellHarmonic::random(default_shell_radii(6), 2, 0.3, &SeededStream::new(1, 0)).unwrap();
        let pairs = sample_gaussian_pairs3(0.3, &SeededStream::new(2, 0), 2000).unwrap();
        let eval = evaluate(&f, &pairs, true);
        for k in [0usize, 5, 17, 40, 100, 150] {
            let h = 1e-6;
            let mut plus = f.clone();
            plus.coefficients_mut()[k] += h;
            let mut minus = f.clone();
            minus.coefficients_mut()[k] -= h;
            let fd = (evaluate(&plus, &pairs, false).objective - evaluate(&minus, &pairs, false).objective) / (2.0 * h);
            assert!(
                (fd - eval.gradient[k]).abs() < 1e-6 * (1.0 + fd.abs()),
                "k = {k}: {fd} vs {}",
                eval.gradient[k]
            );
        }
    }

    #[test]
    fn random_start_does_not_beat_fopt() {
        let rec = perturbation_search(
            &small(0.05, SearchInit::Random { amplitude: 0.3 }),
            &SeededStream::new(3, 0),
        )
        .unwrap();
        assert!(!rec.significant_excess, "{:?}", rec.excess_sigmas);
        assert!(rec.trace.iter().all(|t| t.mean_correction.is_finite()));
        assert!(rec.trace.windows(2).all(|w| w[1].objective >= w[0].objective));
    }

    #[test]
    fn fopt_start_stays_near_fopt() {
        let rec = perturbation_search(&small(0.05, SearchInit::Fopt), &SeededStream::new(4, 0)).unwrap();
        for t in &rec.trace {
            let v = t.validation.as_ref().unwrap();
            assert!((v.value - rec.fopt_stability).abs() <= 4.0 * v.std_error, "{t:?}");
        }
        assert!(!rec.significant_excess);
    }

    #[test]
    fn zero_correlation_objective_vanishes() {
        let rec = perturbation_search(
            &small(0.0, SearchInit::Random { amplitude: 0.3 }),
            &SeededStream::new(5, 0),
        )
        .unwrap();
        assert!(rec.terminal.agrees_with(0.0, 4.0), "{:?}", rec.terminal);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(perturbation_search(&small(0.2, SearchInit::Fopt), &SeededStream::new(0, 0)).is_err());
    }

    #[test]
    fn divergence_carries_state() {
        let e = divergence(
            3,
            "test".into(),
            &ShellHarmonic::fopt(default_shell_radii(2), 1).unwrap(),
        );
        match e {
            Error::Divergence { iteration, state, .. } => {
                assert_eq!(iteration, 3);
                assert!(state.contains("coefficients"));
            }
            _ => unreachable!(),
        }
    }
}
