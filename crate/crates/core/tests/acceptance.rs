//! Acceptance suite: one PASS/FAIL line per criterion, pinned tolerances
//! and runtime budgets.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spherestab::certify::{
    certify_all, perturbation_search, theorem_margin, Constants, SearchConfig, SearchInit, Verdict,
};
use spherestab::measures::mehler::mehler_even_defect;
use spherestab::measures::{mc_sphere_pairs, sample_sphere_pairs, write_pairs_csv, SeededStream, SpherePairLaw};
use spherestab::numeric::{dot3, geomspace, linspace};
use spherestab::qmaxcut::{multi_restart, product_state_energy, tensor_oracle_energy, BlochAssignment, WeightedGraph};
use spherestab::specfun::{bessel_ratio, langevin};
use spherestab::spectrum::{
    amos_lower, amos_upper, concentration, lambda1, lambda_d_bessel, lambda_d_quadrature,
    radial_integral_identity_defect, EigenvalueQuery,
};
use spherestab::stability::{
    bilinear_lemma_check, default_shell_radii, fopt_stability, noise_stability_mc, quadratic_lemma_check, recenter,
    ShellHarmonic, SphereFunction,
};

const SIGMAS: f64 = 4.0;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn budget(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("runtime {t:.2?} exceeds {limit:?}"))?;
    Ok(t)
}

fn random_shell(seed: u64, stream: u64) -> ShellHarmonic {
    ShellHarmonic::random(default_shell_radii(16), 2, 0.3, &SeededStream::new(seed, stream)).unwrap()
}

fn ac1_constant_certification() -> Check {
    let start = Instant::now();
    let c = Constants::default();
    let reports = certify_all(&c).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    ensure(ids == ["rsq_phi", "tail_phi", "change_of_measure", "threshold"], || {
        format!("{ids:?}")
    })?;
    for r in &reports {
        ensure(r.verdict == Verdict::Pass, || {
            format!("{} FAIL at {:?}", r.id, r.argmin)
        })?;
        ensure(r.segments.iter().any(|s| s.label == "script"), || {
            format!("{} lacks the script grid", r.id)
        })?;
    }
    let rsq = reports[0].segment("script").unwrap();
    ensure(rsq.points == 1000, || format!("rsq grid has {} points", rsq.points))?;
    let tail = reports[1].segment("script").unwrap();
    ensure(tail.points == 999, || format!("tail grid has {} points", tail.points))?;
    let crossover = c.crossover();
    ensure((crossover - 0.98 / 9.4).abs() < 1e-15 && crossover >= 0.104, || {
        format!("crossover {crossover}")
    })?;
    let sup = reports[2].summary["sup_ratio"];
    ensure(sup < 9.4, || format!("sup C/rho = {sup}"))?;
    let t = budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "4 certifiers PASS, crossover {crossover:.6}, sup C/rho {sup:.4}, {t:.2?}"
    ))
}

fn ac2_spectral_triangle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_cb, mut worst_q) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let a = (rng.random_range(1e-3f64.ln()..50f64.ln())).exp();
        let rho = rng.random_range(0.01..0.95);
        let r = rng.random_range(0.1..5.0);
        let s = a * (1.0 - rho * rho) / (rho * r);
        let a_check = concentration(rho, r, s).unwrap();
        let closed = langevin(a_check);
        let bessel = lambda_d_bessel(1, 3, a_check).unwrap();
        let quad = lambda_d_quadrature(&EigenvalueQuery::new(1, 3, rho, r, s)).map_err(|e| e.to_string())?;
        worst_cb = worst_cb.max((closed - bessel).abs());
        worst_q = worst_q.max((closed - quad).abs()).max((bessel - quad).abs());
        ensure((closed - bessel).abs() <= 1e-12, || {
            format!("a = {a}: closed {closed} vs bessel {bessel}")
        })?;
        ensure((closed - quad).abs() <= 1e-8 && (bessel - quad).abs() <= 1e-8, || {
            format!("a = {a}: quadrature {quad} vs {closed}")
        })?;
    }
    let t = budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "200 points, max |closed-bessel| {worst_cb:.1e}, max |.-quadrature| {worst_q:.1e}, {t:.2?}"
    ))
}

fn ac3_amos_and_radial_identity() -> Check {
    let alphas = linspace(0.0, 50.0, 100);
    let args = geomspace(1e-3, 1e3, 100);
    let mut points = 0;
    for &alpha in &alphas {
        for &a in &args {
            let v = bessel_ratio(alpha, a).map_err(|e| e.to_string())?;
            let (lo, hi) = (amos_lower(alpha, a), amos_upper(alpha, a));
            ensure(lo <= v && v <= hi, || {
                format!("alpha = {alpha}, a = {a}: {lo} <= {v} <= {hi} fails")
            })?;
            points += 1;
        }
    }
    let mut worst = 0.0f64;
    for a in geomspace(0.05, 20.0, 60) {
        let d = radial_integral_identity_defect(a).map_err(|e| e.to_string())?;
        worst = worst.max(d.abs());
        ensure(d.abs() <= 1e-8, || format!("radial identity defect {d:e} at a = {a}"))?;
    }
    Ok(format!(
        "Amos sandwich at {points} points, radial identity defect <= {worst:.1e}"
    ))
}

fn ac4_sampler_spectrum() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for k in 0..10u64 {
        let rho = rng.random_range(0.05..0.9);
        let r = rng.random_range(0.2..3.0);
        let s = rng.random_range(0.2..3.0);
        let a = concentration(rho, r, s).unwrap();
        let [st] = mc_sphere_pairs(a, &SeededStream::new(40, k), 1_000_000, |u, v| [dot3(u, v)]);
        let target = lambda1(3, a).unwrap();
        let z = (st.mean() - target) / st.std_error();
        worst = worst.max(z.abs());
        ensure(z.abs() <= SIGMAS, || {
            format!("sphere pairs rho={rho} r={r} s={s}: z = {z:.2}")
        })?;
    }
    for (k, rho) in [0.02, 0.05, 0.1].into_iter().enumerate() {
        let est = noise_stability_mc(
            &SphereFunction::fopt(),
            None,
            rho,
            &SeededStream::new(41, k as u64),
            1_000_000,
        )
        .map_err(|e| e.to_string())?;
        let target = fopt_stability(rho).unwrap();
        let z = (est.value - target) / est.std_error;
        worst = worst.max(z.abs());
        ensure(est.agrees_with(target, SIGMAS), || {
            format!("fopt at rho = {rho}: z = {z:.2}")
        })?;
    }
    let t = budget(start, Duration::from_secs(120))?;
    Ok(format!("13 estimates within 4 sigma (max |z| {worst:.2}), {t:.2?}"))
}

fn ac5_inequalities() -> Check {
    let count = 200_000;
    let mut checks = 0;
    let mut min_z = f64::INFINITY;
    for (i, rho) in [0.02, 0.05, 0.1].into_iter().enumerate() {
        for k in 0..20u64 {
            let f: SphereFunction = random_shell(500 + i as u64, k).into();
            let g: SphereFunction = random_shell(600 + i as u64, k).into();
            let s = SeededStream::new(50 + i as u64, k);
            let q = quadratic_lemma_check(&f, rho, &s, count).map_err(|e| e.to_string())?;
            let b = bilinear_lemma_check(&f, &g, rho, &s.with_stream(k + 100), count).map_err(|e| e.to_string())?;
            for (name, c) in [("quadratic", &q), ("bilinear", &b)] {
                min_z = min_z.min(c.slack.value / c.slack.std_error.max(f64::MIN_POSITIVE));
                ensure(c.holds, || {
                    format!("{name} bound fails at rho = {rho}, function {k}: {:?}", c.slack)
                })?;
                checks += 1;
            }
        }
    }
    let rho = 0.05;
    let margin_count = 400_000;
    let mut min_slack = f64::INFINITY;
    for k in 0..5u64 {
        let mut f = random_shell(700, k);
        recenter(&mut f, 12, 1e-12).map_err(|e| e.to_string())?;
        let m =
            theorem_margin(&f.into(), None, rho, &SeededStream::new(51, k), margin_count).map_err(|e| e.to_string())?;
        min_slack = min_slack.min(m.slack / m.std_error);
        ensure(m.holds, || {
            format!(
                "margin slack {:.3e} (sigma {:.1e}) for mean-zero function {k}",
                m.slack, m.std_error
            )
        })?;
    }
    let fopt = SphereFunction::fopt();
    let m = theorem_margin(&fopt, None, rho, &SeededStream::new(52, 0), margin_count).map_err(|e| e.to_string())?;
    ensure(m.slack.abs() <= SIGMAS * m.std_error, || {
        format!("fopt slack {:e}", m.slack)
    })?;
    let minus = SphereFunction::orthogonal([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]).unwrap();
    let p =
        theorem_margin(&fopt, Some(&minus), rho, &SeededStream::new(52, 1), margin_count).map_err(|e| e.to_string())?;
    ensure(p.slack.abs() <= SIGMAS * p.std_error, || {
        format!("(fopt, -fopt) slack {:e}", p.slack)
    })?;
    Ok(format!(
        "{checks} bound checks hold (min slack/sigma {min_z:.1}), 5 mean-zero margins hold (min slack/sigma {min_slack:.1}), \
         equality cases within 4 sigma"
    ))
}

fn ac6_mehler() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.5..1.5));
        let rho = rng.random_range(0.02..=0.3);
        for degree in [8, 16, 24] {
            let m = mehler_even_defect(x, rho, degree).map_err(|e| e.to_string())?;
            for w in m.terms.windows(2) {
                ensure(w[1].coordinate_even >= w[0].coordinate_even, || {
                    format!("not monotone at {x:?}")
                })?;
            }
            ensure(m.partial_sum <= m.closed_unweighted, || {
                format!(
                    "partial sum {} above closed form {} at {x:?}, rho {rho}, D {degree}",
                    m.partial_sum, m.closed_unweighted
                )
            })?;
            if degree == 24 {
                let d = (m.full_even_sum - m.closed_unweighted).abs();
                worst = worst.max(d);
                ensure(d <= 1e-8, || format!("full even sum off by {d:e} at {x:?}, rho {rho}"))?;
            }
        }
    }
    Ok(format!(
        "20 points: monotone, dominated, full even sums within {worst:.1e}"
    ))
}

fn ac7_qmaxcut() -> Check {
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let n = 1 + (k % 6) as usize;
        let g = WeightedGraph::random(n, 0.7, &SeededStream::new(70, k));
        let a = BlochAssignment::random(n, &SeededStream::new(71, k));
        let bloch = product_state_energy(&g, &a).map_err(|e| e.to_string())?;
        let oracle = tensor_oracle_energy(&g, &a.spinors()).map_err(|e| e.to_string())?;
        worst = worst.max((bloch - oracle).abs());
        ensure((bloch - oracle).abs() <= 1e-10, || {
            format!("instance {k}: {bloch} vs {oracle}")
        })?;
    }
    let tri = WeightedGraph::parse("0 1 1\n1 2 1\n0 2 1\n").unwrap();
    let t = multi_restart(&tri, &SeededStream::new(72, 0), 16, 2000).map_err(|e| e.to_string())?;
    ensure((t.best.energy - 9.0).abs() <= 1e-9, || {
        format!("triangle optimum {}", t.best.energy)
    })?;
    let edge = WeightedGraph::parse("0 1 1\n").unwrap();
    let e = multi_restart(&edge, &SeededStream::new(72, 100), 4, 200).map_err(|e| e.to_string())?;
    ensure((e.best.energy - 4.0).abs() <= 1e-12, || {
        format!("edge optimum {}", e.best.energy)
    })?;
    Ok(format!(
        "oracle agreement {worst:.1e} on 100 instances, triangle 9, edge 4"
    ))
}

fn ac8_perturbation_search() -> Check {
    let start = Instant::now();
    let mut max_sigmas = f64::NEG_INFINITY;
    let mut runs = 0;
    for (i, rho) in [0.02, 0.05, 0.1].into_iter().enumerate() {
        for init in [SearchInit::Fopt, SearchInit::Random { amplitude: 0.3 }] {
            let rec = perturbation_search(&SearchConfig::new(rho, init), &SeededStream::new(80 + i as u64, 0))
                .map_err(|e| e.to_string())?;
            max_sigmas = max_sigmas.max(rec.excess_sigmas);
            ensure(
                !rec.significant_excess && rec.excess <= 5.0 * rec.terminal.std_error,
                || {
                    format!(
                        "rho = {rho}, {init:?}: excess {:.3e} = {:.2} sigma",
                        rec.excess, rec.excess_sigmas
                    )
                },
            )?;
            runs += 1;
        }
    }
    let t = budget(start, Duration::from_secs(600))?;
    Ok(format!(
        "{runs} searches, max terminal excess {max_sigmas:.2} sigma, {t:.2?}"
    ))
}

fn ac9_reproducibility() -> Check {
    let dir = std::env::temp_dir().join(format!("spherestab-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let outputs = |tag: &str| -> Result<Vec<std::path::PathBuf>, String> {
        let write = |name: &str, bytes: Vec<u8>| -> Result<std::path::PathBuf, String> {
            let p = dir.join(format!("{name}.{tag}"));
            fs::write(&p, bytes).map_err(|e| e.to_string())?;
            Ok(p)
        };
        let law = SpherePairLaw::new(0.4, 1.0, 2.0).unwrap();
        let mut csv = Vec::new();
        write_pairs_csv(&sample_sphere_pairs(&law, &SeededStream::new(90, 0), 20_000), &mut csv)
            .map_err(|e| e.to_string())?;
        let mc = noise_stability_mc(&SphereFunction::fopt(), None, 0.05, &SeededStream::new(90, 1), 300_000)
            .map_err(|e| e.to_string())?;
        let f: SphereFunction = random_shell(91, 0).into();
        let lemma = quadratic_lemma_check(&f, 0.05, &SeededStream::new(90, 2), 100_000).map_err(|e| e.to_string())?;
        let config = SearchConfig {
            iterations: 3,
            train_count: 20_000,
            validation_count: 20_000,
            final_count: 50_000,
            ..SearchConfig::new(0.05, SearchInit::Random { amplitude: 0.3 })
        };
        let search = perturbation_search(&config, &SeededStream::new(90, 3)).map_err(|e| e.to_string())?;
        let g = WeightedGraph::random(8, 0.5, &SeededStream::new(90, 4));
        let qmc = multi_restart(&g, &SeededStream::new(90, 5), 6, 500).map_err(|e| e.to_string())?;
        let json = |v: serde_json::Result<String>| v.map(String::into_bytes).map_err(|e| e.to_string());
        Ok(vec![
            write("sphere_pairs.csv", csv)?,
            write("fopt_mc.json", json(serde_json::to_string_pretty(&mc))?)?,
            write("lemma.json", json(serde_json::to_string_pretty(&lemma))?)?,
            write("search.json", json(serde_json::to_string_pretty(&search))?)?,
            write("qmaxcut.json", json(serde_json::to_string_pretty(&qmc))?)?,
        ])
    };
    let first = outputs("1")?;
    let second = outputs("2")?;
    let read = |p: &Path| fs::read(p).map_err(|e| e.to_string());
    for (a, b) in first.iter().zip(&second) {
        ensure(read(a)? == read(b)?, || {
            format!("{} and {} differ", a.display(), b.display())
        })?;
    }
    let _ = fs::remove_dir_all(&dir);
    Ok(format!(
        "{} output files byte-identical across repeated runs",
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1", "constant certification suite", ac1_constant_certification),
        ("AC2", "spectral consistency triangle", ac2_spectral_triangle),
        ("AC3", "Amos sandwich and radial identity", ac3_amos_and_radial_identity),
        ("AC4", "sampler/spectrum agreement", ac4_sampler_spectrum),
        ("AC5", "inequality suite", ac5_inequalities),
        ("AC6", "Mehler even-part check", ac6_mehler),
        ("AC7", "Quantum MAX-CUT oracle equivalence", ac7_qmaxcut),
        ("AC8", "perturbation search", ac8_perturbation_search),
        ("AC9", "reproducibility", ac9_reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
