//! Dispatch from a validated config to the owning core module.

use std::time::Instant;

use tsvf_core::measurement::{
    run_sequential_measurement, run_signaling_demo, run_single_measurement, BranchReport, UnitarityCheck,
};
use tsvf_core::robustness::{decay_population, fit_slopes, sweep_robustness, Ratio};
use tsvf_core::rules::{
    abl_probability, born_probability, sample_final_states_par, OutcomeDistribution, PRNG_NAME,
};
use tsvf_core::{Complex64, Operator, PureState, TwoState};

use crate::config::{resolve, ConfigError, Resolved, ScenarioConfig, SweepParams};
use crate::report::{Cell, Check, ScenarioReport, Table};

/// Norm and reversal tolerance shared by every scenario.
const UNITARITY_TOL: f64 = 1e-10;

type Output = (Vec<Table>, Vec<Check>);

/// Runs a config. Invalid configs are rejected; module failures during the
/// run are recorded in the report's `error` field.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioReport, ConfigError> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let resolved = resolve(cfg, &mut notes)?;
    let prng = cfg.kind.is_stochastic().then_some(PRNG_NAME);
    let (tables, checks, error) = match dispatch(&resolved) {
        Ok((t, c)) => (t, c, None),
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
    };
    Ok(ScenarioReport {
        name: cfg.name.clone().unwrap_or_else(|| cfg.kind.name().to_string()),
        kind: cfg.kind,
        seed: cfg.seed,
        prng,
        config_echo: toml::to_string(cfg).unwrap_or_default(),
        notes,
        tables,
        checks,
        error,
        duration: start.elapsed(),
    })
}

fn dispatch(r: &Resolved) -> tsvf_core::Result<Output> {
    match r {
        Resolved::Single(c) => single(c),
        Resolved::Sequential(c) => sequential(c),
        Resolved::Signaling(acts) => signaling(acts),
        Resolved::Ensemble { initial, observable, samples, seed } => ensemble(initial, observable, *samples, *seed),
        Resolved::Sweep { params, decay } => sweep(params, decay.as_ref()),
        Resolved::Abl { initial, final_state, observable } => abl(initial, final_state, observable),
        Resolved::Weak { initial, final_state, observables } => weak(initial, final_state, observables),
    }
}

fn distribution_table(name: &str, d: &OutcomeDistribution) -> Table {
    let mut t = Table::new(name, &["eigenvalue", "probability"]);
    for o in &d.outcomes {
        t.push(vec![o.eigenvalue.into(), o.probability.into()]);
    }
    t
}

fn operator_table(name: &str, op: &Operator) -> Table {
    let mut t = Table::new(name, &["row", "col", "re", "im"]);
    let m = op.matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.push(vec![i.into(), j.into(), m[(i, j)].re.into(), m[(i, j)].im.into()]);
        }
    }
    t
}

fn state_table(name: &str, s: &PureState) -> Table {
    let mut t = Table::new(name, &["index", "re", "im"]);
    for (k, z) in s.amplitudes().iter().enumerate() {
        t.push(vec![k.into(), z.re.into(), z.im.into()]);
    }
    t
}

fn windows_table(reports: &[&BranchReport]) -> Table {
    let mut t = Table::new(
        "windows",
        &["window", "t_start", "t_end", "time", "selected", "selected_weight", "residual", "target_residual"],
    );
    for w in reports {
        t.push(vec![
            w.window.clone().into(),
            w.interval.0.into(),
            w.interval.1.into(),
            w.time.into(),
            w.selected.map_or(Cell::Text("-".into()), Cell::from),
            w.selected_weight.into(),
            w.residual.into(),
            w.target_residual.map_or(Cell::Text("-".into()), Cell::from),
        ]);
    }
    t
}

fn unitarity(u: &UnitarityCheck) -> (Table, Vec<Check>) {
    let mut t = Table::new("unitarity", &["max_norm_deviation", "reversal_error"]);
    t.push(vec![u.max_norm_deviation.into(), u.reversal_error.into()]);
    let checks = vec![
        Check::at_most("norm_conserved", u.max_norm_deviation, UNITARITY_TOL),
        Check::at_most("schedule_reversible", u.reversal_error, UNITARITY_TOL),
    ];
    (t, checks)
}

fn single(c: &tsvf_core::measurement::SingleMeasurementConfig) -> tsvf_core::Result<Output> {
    let r = run_single_measurement(c)?;
    let mut b = Table::new("boundary", &["branch", "born_weight", "boundary_weight"]);
    for (k, name) in ["I", "II"].iter().enumerate() {
        b.push(vec![(*name).into(), r.boundary.born_weights[k].into(), r.boundary.weights[k].into()]);
    }
    let mut branches = Table::new("post_branch_weights", &["branch", "weight"]);
    for (k, name) in ["I", "II"].iter().enumerate() {
        branches.push(vec![(*name).into(), r.post.branch_weights[k].into()]);
    }
    let (ut, mut checks) = unitarity(&r.unitarity);
    let bound = match c.boundary_ratio {
        None => c.eps_orth * c.eps_orth,
        Some(ratio) => 1.0 / (1.0 + ratio) * (1.0 + c.eps_orth).powi(2),
    };
    checks.push(Check::at_most("post_residual_bound", r.post.residual - bound, 1e-10));
    checks.push(Check::at_most("pre_single_term", r.pre.target_residual.unwrap_or(f64::INFINITY), 1e-10));
    if c.eps_orth == 0.0 && c.boundary_ratio.is_none() {
        checks.push(Check::at_most("post_single_term", r.post.target_residual.unwrap_or(f64::INFINITY), 1e-10));
    }
    checks.push(Check::holds("boundary_selects_configured_branch", r.boundary.selected == c.selected));
    let tables = vec![
        b,
        windows_table(&[&r.pre, &r.post]),
        branches,
        operator_table("reduced_pre", &r.pre.reduced),
        operator_table("reduced_post", &r.post.reduced),
        ut,
    ];
    Ok((tables, checks))
}

fn sequential(c: &tsvf_core::measurement::SequentialMeasurementConfig) -> tsvf_core::Result<Output> {
    let r = run_sequential_measurement(c)?;
    let mut rev = Table::new("reversal", &["measurement", "branch", "coefficient", "ready_weight", "ortho"]);
    for (tag, readings) in [("x", &r.x_reversal), ("y", &r.y_reversal)] {
        for (k, b) in readings.iter().enumerate() {
            let ortho = match &b.ortho {
                None => "-".to_string(),
                Some(o) => {
                    let idx = (0..o.dim()).max_by(|&i, &j| o.amplitudes()[i].norm().total_cmp(&o.amplitudes()[j].norm()));
                    ["READY", "U", "D"].get(idx.unwrap_or(0)).unwrap_or(&"?").to_string()
                }
            };
            let name = if k == 0 { "up" } else { "down" };
            rev.push(vec![tag.into(), name.into(), b.coefficient.into(), b.ready_weight.into(), ortho.into()]);
        }
    }
    let mut fid = Table::new("effective_backward_spin", &["fidelity_with_selected_x_state"]);
    fid.push(vec![r.backward_spin_fidelity.into()]);
    let (ut, mut checks) = unitarity(&r.unitarity);
    for w in [&r.pre, &r.intermediate, &r.last] {
        checks.push(Check::at_most(&format!("{}_single_term", w.window), w.target_residual.unwrap_or(f64::INFINITY), 1e-10));
        checks.push(Check::at_most(&format!("{}_residual", w.window), w.residual, 1e-10));
    }
    checks.push(Check::at_most("backward_spin_is_x_eigenstate", (1.0 - r.backward_spin_fidelity).abs(), 1e-10));
    let tables = vec![
        windows_table(&[&r.pre, &r.intermediate, &r.last]),
        operator_table("reduced_pre", &r.pre.reduced),
        operator_table("reduced_intermediate", &r.intermediate.reduced),
        operator_table("reduced_final", &r.last.reduced),
        state_table("effective_backward_spin_state", &r.effective_backward_spin),
        fid,
        operator_table("forward_spin_pre", &r.forward_spin_pre),
        rev,
        ut,
    ];
    Ok((tables, checks))
}

fn signaling(acts: &[bool]) -> tsvf_core::Result<Output> {
    let mut bob = Table::new("bob", &["alice_acts", "reading", "p_up", "p_down"]);
    let mut joint = Table::new("joint_abl", &["alice_acts", "eigenvalue", "probability"]);
    let mut marg = Table::new("marginal_without_final", &["alice_acts", "p_up", "p_down"]);
    let mut checks = Vec::new();
    for &a in acts {
        let r = run_signaling_demo(a)?;
        bob.push(vec![a.into(), r.bob.to_string().into(), r.bob_up.into(), r.bob_down.into()]);
        for o in &r.joint.outcomes {
            joint.push(vec![a.into(), o.eigenvalue.into(), o.probability.into()]);
        }
        marg.push(vec![a.into(), r.marginal_without_final.0.into(), r.marginal_without_final.1.into()]);
        let tag = if a { "acts" } else { "idle" };
        checks.push(Check::at_most(&format!("bob_certain_{tag}"), 1.0 - r.bob_up.max(r.bob_down), 1e-12));
        checks.push(Check::holds(&format!("bob_reading_{tag}"), r.bob.to_string() == if a { "down" } else { "up" }));
        checks.push(Check::at_most(
            &format!("no_signaling_without_final_{tag}"),
            (r.marginal_without_final.0 - 0.5).abs(),
            1e-10,
        ));
    }
    Ok((vec![bob, joint, marg], checks))
}

fn ensemble(initial: &PureState, observable: &Operator, m: u64, seed: u64) -> tsvf_core::Result<Output> {
    let born = born_probability(initial, observable)?;
    let s = sample_final_states_par(initial, observable, m, seed)?;
    let mut counts = Table::new("counts", &["eigenvalue", "count", "frequency", "born"]);
    let freq = s.frequencies();
    let mut worst = 0.0f64;
    for (k, o) in born.outcomes.iter().enumerate() {
        counts.push(vec![o.eigenvalue.into(), s.counts[k].into(), freq[k].into(), o.probability.into()]);
        let sd = (m as f64 * o.probability * (1.0 - o.probability)).sqrt();
        let dev = (s.counts[k] as f64 - m as f64 * o.probability).abs();
        worst = worst.max(if sd > 0.0 { dev / sd } else if dev > 0.0 { f64::INFINITY } else { 0.0 });
    }
    let chi = s.chi_square(&born.probabilities());
    let mut chi_t = Table::new("chi_square", &["statistic", "dof", "p_value"]);
    chi_t.push(vec![chi.statistic.into(), chi.dof.into(), chi.p_value.into()]);
    let checks = vec![
        Check::at_most("counts_within_4_sigma", worst, 4.0),
        Check::holds("conditional_abl_deterministic", s.conditional_deterministic),
        Check { name: "chi_square_p_value".into(), value: chi.p_value, tolerance: 1e-3, passed: chi.p_value > 1e-3 },
    ];
    Ok((vec![distribution_table("born", &born), counts, chi_t], checks))
}

fn ratio_cell(r: &Ratio) -> Cell {
    match r {
        Ratio::Finite(l) => (*l).into(),
        Ratio::Divergent => "divergent".into(),
    }
}

fn sweep(p: &SweepParams, decay: Option<&(tsvf_core::robustness::DecayModel, Vec<f64>)>) -> tsvf_core::Result<Output> {
    let rows = sweep_robustness(&p.overlaps, &p.totals, &p.collapsed, p.target)?;
    let mut t = Table::new("sweep", &["c", "N", "n", "log10_ratio_exact", "log10_ratio_approx"]);
    for r in &rows {
        t.push(vec![r.c.into(), r.big_n.into(), r.n.into(), ratio_cell(&r.log10_ratio_exact), ratio_cell(&r.log10_ratio_approx)]);
    }
    let fits = fit_slopes(&rows);
    let mut f = Table::new("slopes", &["c", "n", "points", "slope", "expected_slope", "max_residual"]);
    let mut checks = Vec::new();
    for s in &fits {
        f.push(vec![s.c.into(), s.n.into(), s.points.into(), s.slope.into(), s.expected_slope.into(), s.max_residual.into()]);
        checks.push(Check::at_most(&format!("affine_c{}_n{}", s.c, s.n), s.max_residual, 1e-9));
        checks.push(Check::at_most(&format!("slope_c{}_n{}", s.c, s.n), (s.slope - s.expected_slope).abs(), 1e-9));
    }
    let monotone = p.overlaps.iter().filter(|&&c| c < 1.0 && c > 0.0).all(|&c| {
        p.collapsed.iter().all(|&n| {
            let mut ys: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.c == c && r.n == n)
                .filter_map(|r| r.log10_ratio_exact.log10().map(|y| (r.big_n - r.n, y)))
                .collect();
            ys.sort_by_key(|y| y.0);
            ys.windows(2).all(|w| w[0].0 == w[1].0 || w[1].1 > w[0].1)
        })
    });
    checks.push(Check::holds("monotone_in_survivors", monotone));
    let mut tables = vec![t, f];
    if let Some((model, times)) = decay {
        let mut d = Table::new("decay", &["t", "population"]);
        for &tt in times {
            d.push(vec![tt.into(), decay_population(model, tt)?.into()]);
        }
        tables.push(d);
    }
    Ok((tables, checks))
}

fn abl(initial: &PureState, final_state: &PureState, observable: &Operator) -> tsvf_core::Result<Output> {
    let a = abl_probability(initial, final_state, observable)?;
    let b = born_probability(initial, observable)?;
    let checks = vec![Check::at_most("abl_normalized", (a.total() - 1.0).abs(), 1e-12)];
    Ok((vec![distribution_table("abl", &a), distribution_table("born", &b)], checks))
}

fn weak(initial: &PureState, final_state: &PureState, observables: &[(String, Operator)]) -> tsvf_core::Result<Output> {
    let ts = TwoState::new(initial.clone(), final_state.clone())?;
    let mut t = Table::new("weak_values", &["observable", "re", "im"]);
    for (name, op) in observables {
        let w = ts.weak_value(op)?;
        t.push(vec![name.clone().into(), w.re.into(), w.im.into()]);
    }
    let ov = ts.overlap();
    let mut o = Table::new("overlap", &["re", "im"]);
    o.push(vec![ov.re.into(), ov.im.into()]);
    let id = ts.weak_value(&Operator::identity(initial.layout().clone()))?;
    let checks = vec![Check::at_most("identity_weak_value", (id - Complex64::new(1.0, 0.0)).norm(), 1e-12)];
    Ok((vec![t, o], checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str) -> ScenarioReport {
        run(&parse_config(text).unwrap()).unwrap()
    }

    #[test]
    fn signaling_reports_bob_up_when_alice_idles() {
        let r = run_text("kind = \"signaling\"\n[signaling]\nalice_acts = false\n");
        assert!(r.passed());
        assert_eq!(r.table("bob").unwrap().rows[0][1], Cell::Text("up".into()));
    }

    #[test]
    fn born_ensemble_reports_counts_and_chi_square() {
        let r = run_text("kind = \"born_ensemble\"\nseed = 12\n");
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.table("counts").unwrap().rows.len(), 2);
        assert!(r.table("chi_square").is_some());
        assert_eq!(r.prng, Some(PRNG_NAME));
    }

    #[test]
    fn default_sweep_is_monotone() {
        let r = run_text("kind = \"robustness_sweep\"\n");
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.table("sweep").unwrap().columns, ["c", "N", "n", "log10_ratio_exact", "log10_ratio_approx"]);
    }

    #[test]
    fn divergent_rows_print_as_text() {
        let r = run_text("kind = \"robustness_sweep\"\n[robustness_sweep]\noverlaps = [0.0]\ntotals = [3]\ncollapsed = [1]\n");
        assert_eq!(r.table("sweep").unwrap().rows[0][3], Cell::Text("divergent".into()));
    }

    #[test]
    fn measurement_scenarios_pass_their_checks() {
        for kind in ["single_measurement", "sequential_measurement"] {
            let r = run_text(&format!("kind = \"{kind}\"\n"));
            assert!(r.passed(), "{kind}: {:?} {:?}", r.error, r.checks);
        }
    }
}
