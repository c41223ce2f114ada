//! Acceptance run: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use tsvf_cli::{load_config, render, run, Format};
use tsvf_core::measurement::{
    run_sequential_measurement, run_signaling_demo, run_single_measurement, spin_state, Axis, QubitState,
    SequentialMeasurementConfig, SingleMeasurementConfig,
};
use tsvf_core::robustness::{
    fit_slopes, robustness_ratio, sweep_robustness, CollapseRecord, CollapseTarget, ProductEnvironment,
    DEFAULT_COLLAPSED, DEFAULT_OVERLAPS, DEFAULT_TOTALS,
};
use tsvf_core::rules::{abl_probability, born_probability, marginalize_final, sample_final_states_par, Spectrum};
use tsvf_core::{c64, Complex64, Operator, PureState, SubsystemLayout, TwoState};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(label: &str, got: f64, tol: f64) -> Result<String, String> {
    if got <= tol {
        Ok(format!("{label} {got:.3e} <= {tol:.3e}"))
    } else {
        Err(format!("{label} {got:.3e} > {tol:.3e}"))
    }
}

fn deadline(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn abl_determinism() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let layout = qudit("q", r.random_range(2..=5));
        let psi = random_state(&mut r, &layout);
        let obs = random_observable(&mut r, &layout);
        let spec = Spectrum::of(&obs).map_err(e)?;
        let k = r.random_range(0..spec.len());
        let dist = abl_probability(&psi, &spec.eigenvectors()[k], &obs).map_err(e)?;
        for (j, o) in dist.outcomes.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((o.probability - want).abs());
        }
    }
    deadline(start.elapsed(), Duration::from_secs(1))?;
    within("max deviation", worst, 1e-12)
}

fn born_recovery() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let layout = qudit("q", r.random_range(2..=5));
        let psi = random_state(&mut r, &layout);
        let obs = random_observable(&mut r, &layout);
        let fin = Spectrum::of(&random_observable(&mut r, &layout)).map_err(e)?;
        let m = marginalize_final(&psi, &obs, fin.eigenvectors()).map_err(e)?;
        let b = born_probability(&psi, &obs).map_err(e)?;
        worst = worst.max(m.max_abs_diff(&b));
    }
    deadline(start.elapsed(), Duration::from_secs(5))?;
    within("max |marginal - born|", worst, 1e-10)
}

fn ensemble() -> Outcome {
    let start = Instant::now();
    let m = 100_000u64;
    let psi = spin_state("s", Axis::X, true).map_err(e)?;
    let s = sample_final_states_par(&psi, &Operator::sigma_z("s"), m, 7).map_err(e)?;
    deadline(start.elapsed(), Duration::from_secs(5))?;
    if !s.conditional_deterministic {
        return Err("conditional ABL not deterministic".into());
    }
    let bound = 4.0 * (m as f64 / 4.0).sqrt();
    let dev = s.counts.iter().map(|&c| (c as f64 - m as f64 / 2.0).abs()).fold(0.0, f64::max);
    within("max |count - M/2|", dev, bound).map(|s| format!("{s}, conditional deterministic"))
}

fn single_measurement() -> Outcome {
    let residual = |eps: f64| -> Result<f64, String> {
        let cfg = SingleMeasurementConfig { eps_orth: eps, env_qubits: 3, ..Default::default() };
        Ok(run_single_measurement(&cfg).map_err(e)?.post.residual)
    };
    let r0 = residual(0.0)?;
    let r1 = residual(0.1)?;
    let r2 = residual(0.05)?;
    within("orthogonal residual", r0, 1e-10)?;
    within("eps=0.1 residual", r1, 1e-2)?;
    let scale = (r1 / r2) / 4.0;
    if !(0.5..=2.0).contains(&scale) {
        return Err(format!("residual ratio for doubled eps is {:.3}, expected 4 within a factor 2", r1 / r2));
    }
    Ok(format!("residuals {r0:.1e}, {r1:.3e}; doubling eps scales by {:.3}", r1 / r2))
}

fn sequential_measurement() -> Outcome {
    let start = Instant::now();
    let rep = run_sequential_measurement(&SequentialMeasurementConfig::default()).map_err(e)?;
    deadline(start.elapsed(), Duration::from_secs(1))?;
    let mut worst = 0.0f64;
    for w in [&rep.pre, &rep.intermediate, &rep.last] {
        let t = w.target_residual.ok_or_else(|| format!("window {} has no target", w.window))?;
        worst = worst.max(t).max(w.residual);
    }
    within("max window residual", worst, 1e-10)
}

fn signaling() -> Outcome {
    let idle = run_signaling_demo(false).map_err(e)?;
    let acts = run_signaling_demo(true).map_err(e)?;
    within("1 - P(up | idle)", 1.0 - idle.bob_up, 1e-12)?;
    within("1 - P(down | acts)", 1.0 - acts.bob_down, 1e-12)?;
    let m = [idle.marginal_without_final, acts.marginal_without_final]
        .iter()
        .map(|(u, d)| (u - 0.5).abs().max((d - 0.5).abs()))
        .fold(0.0, f64::max);
    within("marginal deviation", m, 1e-10).map(|s| format!("bob reads up / down with certainty, {s}"))
}

fn dense_product(record: &[QubitState]) -> Vec<Complex64> {
    record.iter().fold(vec![c64(1.0, 0.0)], |acc, q| acc.iter().flat_map(|a| [a * q[0], a * q[1]]).collect())
}

/// Projects particle `j` of an `n`-particle register onto `target`.
fn project(v: &mut [Complex64], n: usize, j: usize, target: &QubitState) {
    let stride = 1usize << (n - 1 - j);
    for base in 0..v.len() {
        if base & stride != 0 {
            continue;
        }
        let (a, b) = (v[base], v[base + stride]);
        let amp = target[0].conj() * a + target[1].conj() * b;
        v[base] = target[0] * amp;
        v[base + stride] = target[1] * amp;
    }
}

fn brute_force(env: &ProductEnvironment, rec: &CollapseRecord) -> f64 {
    let n = env.len();
    let (mut v1, mut v2) = (dense_product(env.e1()), dense_product(env.e2()));
    for (&j, c) in rec.particles().iter().zip(rec.targets()) {
        project(&mut v1, n, j, c);
        project(&mut v2, n, j, c);
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (n1, n2) = (norm(&v1), norm(&v2));
    let ov = v1.iter().zip(&v2).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm() / (n1 * n2);
    n1 / (ov * ov * n2)
}

fn robustness_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &c in &[0.3, 0.5, 0.9] {
        for big in 1..=12usize {
            for n in 0..big {
                let env = ProductEnvironment::uniform(big, c).map_err(e)?;
                for target in [CollapseTarget::First, CollapseTarget::Symmetric] {
                    let rec = CollapseRecord::leading(&env, n, target).map_err(e)?;
                    let got = robustness_ratio(&env, &rec).map_err(e)?.exact.value().ok_or("divergent")?;
                    worst = worst.max((got / brute_force(&env, &rec) - 1.0).abs());
                }
            }
        }
    }
    let env = ProductEnvironment::uniform(10, 0.5).map_err(e)?;
    let rec = CollapseRecord::leading(&env, 2, CollapseTarget::Symmetric).map_err(e)?;
    let r = robustness_ratio(&env, &rec).map_err(e)?.exact.value().ok_or("divergent")?;
    deadline(start.elapsed(), Duration::from_secs(10))?;
    within("max relative error vs dense", worst, 1e-9)?;
    within("N=10 n=2 c=0.5 relative error from 65536", (r / 65536.0 - 1.0).abs(), 1e-9)
        .map(|s| format!("dense agreement {worst:.1e}, {s}"))
}

fn robustness_slope() -> Outcome {
    let rows = sweep_robustness(&DEFAULT_OVERLAPS, &DEFAULT_TOTALS, &DEFAULT_COLLAPSED, CollapseTarget::First)
        .map_err(e)?;
    let fits = fit_slopes(&rows);
    if fits.is_empty() {
        return Err("no fits".into());
    }
    let slope_err = fits.iter().map(|f| (f.slope - f.expected_slope).abs()).fold(0.0, f64::max);
    let resid = fits.iter().map(|f| f.max_residual).fold(0.0, f64::max);
    within("max slope error", slope_err, 1e-9)?;
    within("max fit residual", resid, 1e-9).map(|s| format!("{} groups, {s}", fits.len()))
}

fn weak_values() -> Outcome {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let layout = qudit("q", r.random_range(2..=5));
        let psi = random_state(&mut r, &layout);
        let a = random_hermitian(&mut r, &layout);
        let w = TwoState::new(psi.clone(), psi.clone()).map_err(e)?.weak_value(&a).map_err(e)?;
        let expect = a.sandwich(&psi, &psi).map_err(e)?;
        worst = worst.max((w - expect).norm());
    }
    within("max |weak - expectation|", worst, 1e-10)?;

    let spin = TwoState::new(spin_state("s", Axis::X, true).map_err(e)?, spin_state("s", Axis::Y, true).map_err(e)?)
        .map_err(e)?;
    let wz = spin.weak_value(&Operator::sigma_z("s")).map_err(e)?;
    within("|w(sigma_z) - i|", (wz - c64(0.0, 1.0)).norm(), 1e-12)?;

    let boxes = SubsystemLayout::single("box", 3).map_err(e)?;
    let psi = PureState::from_real(boxes.clone(), &[1.0, 1.0, 1.0]).map_err(e)?.normalized();
    let phi = PureState::from_real(boxes.clone(), &[1.0, 1.0, -1.0]).map_err(e)?.normalized();
    let ts = TwoState::new(psi, phi).map_err(e)?;
    let mut ws = Vec::new();
    for k in 0..3 {
        let p = Operator::projector(&PureState::basis(boxes.clone(), k).map_err(e)?);
        ws.push(ts.weak_value(&p).map_err(e)?);
    }
    let want = [1.0, 1.0, -1.0];
    let dev = ws.iter().zip(want).map(|(w, x)| (w - c64(x, 0.0)).norm()).fold(0.0, f64::max);
    within("three-box deviation", dev, 1e-12)?;
    let sum: Complex64 = ws.iter().sum();
    within("|sum - 1|", (sum - c64(1.0, 0.0)).norm(), 1e-12)
        .map(|_| format!("expectation {worst:.1e}, w(sigma_z) = i, three boxes (1, 1, -1)"))
}

fn unitarity() -> Outcome {
    let mut checks = Vec::new();
    for (eps, ratio) in [(0.0, None), (0.1, None), (0.0, Some(100.0))] {
        let cfg = SingleMeasurementConfig { eps_orth: eps, boundary_ratio: ratio, ..Default::default() };
        checks.push(run_single_measurement(&cfg).map_err(e)?.unitarity);
    }
    for x in 0..2 {
        for y in 0..2 {
            let cfg = SequentialMeasurementConfig { x_reading: x, y_reading: y, ..Default::default() };
            checks.push(run_sequential_measurement(&cfg).map_err(e)?.unitarity);
        }
    }
    let norm = checks.iter().map(|u| u.max_norm_deviation).fold(0.0, f64::max);
    let rev = checks.iter().map(|u| u.reversal_error).fold(0.0, f64::max);
    within("max norm deviation", norm, 1e-10)?;
    within("max reversal error", rev, 1e-10).map(|s| format!("{} scenarios, {s}", checks.len()))
}

fn reproducibility() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(&dir).map_err(e)?.filter_map(|d| d.ok().map(|d| d.path())).collect();
    paths.retain(|p| p.extension().is_some_and(|x| x == "toml"));
    paths.sort();
    for p in &paths {
        let (cfg, _) = load_config(p).map_err(e)?;
        for format in [Format::Csv, Format::Jsonl, Format::Text] {
            let a = render(&run(&cfg).map_err(e)?, format).data;
            let b = render(&run(&cfg).map_err(e)?, format).data;
            if a != b {
                return Err(format!("{} differs between runs ({format:?})", p.display()));
            }
        }
    }
    Ok(format!("{} configs bit-identical across runs", paths.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("abl_determinism", abl_determinism),
        ("born_recovery", born_recovery),
        ("ensemble_statistics", ensemble),
        ("single_measurement_selection", single_measurement),
        ("sequential_windows", sequential_measurement),
        ("signaling_demo", signaling),
        ("robustness_oracle", robustness_oracle),
        ("robustness_slope", robustness_slope),
        ("weak_values", weak_values),
        ("unitarity_and_reversal", unitarity),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({ms:.0} ms)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({ms:.0} ms)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
